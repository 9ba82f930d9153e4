"""Scripted book-chat dialogues with offline generation, validation, and review.

The conversational scaffold is a hand-authored script; the only generated
parts are typed slot fillers that must pass rubric scoring and human
moderation before a session may utter them.
"""

__version__ = "0.1.0"
