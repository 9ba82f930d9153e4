"""Build a deterministic demo cohort: N children, N books, one book each.

Child c000 is always Jip (age 10, pirates) reading Peter Pan, so walkthroughs
in the README have a stable anchor. Everything else cycles through small
pools by index; no randomness, so repeated runs write identical files.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from dialogue_forge.content_store import BookMeta, ChildProfile, Cohort, save_cohort

FIRST_NAMES = (
    "Jip", "Mia", "Noah", "Luna", "Sam", "Ava", "Leo", "Zoe", "Max", "Ida",
    "Finn", "Nora", "Eli", "Ruby", "Oscar", "Tess", "Hugo", "Lily", "Ivan", "Rosa",
)

INTEREST_POOL = (
    ("drawing", "animals"),
    ("football", "space"),
    ("swimming", "dinosaurs"),
    ("baking", "music"),
    ("chess", "robots"),
)

MOTIF_POOL = (
    ("pirates",),
    ("dragons",),
    ("space travel",),
    ("talking animals",),
    ("hidden treasure",),
    ("magic",),
)

READING_PREFS = (
    ("adventure", "humor"),
    ("fantasy",),
    ("mystery", "comics"),
)

CLASSIC_BOOKS = (
    ("Peter Pan", "J. M. Barrie", "Peter whisks Wendy and her brothers to Neverland, where lost boys, a ticking crocodile and Captain Hook wait.", ("adventure", "growing up")),
    ("The Wonderful Wizard of Oz", "L. Frank Baum", "A cyclone carries Dorothy to Oz, and she follows the yellow brick road to find her way home.", ("friendship", "courage")),
    ("Alice's Adventures in Wonderland", "Lewis Carroll", "Alice tumbles down a rabbit hole into a land where logic bends and a queen shouts about croquet.", ("curiosity", "nonsense")),
    ("The Jungle Book", "Rudyard Kipling", "Mowgli grows up among wolves and learns the law of the jungle from Baloo and Bagheera.", ("belonging", "nature")),
    ("Heidi", "Johanna Spyri", "An orphan girl wins over her gruff grandfather and the mountains themselves.", ("family", "kindness")),
    ("Pinocchio", "Carlo Collodi", "A wooden puppet dreams of becoming a real boy and learns honesty the hard way.", ("honesty", "growing up")),
    ("The Secret Garden", "Frances Hodgson Burnett", "Mary discovers a locked garden and, tending it, brings a whole household back to life.", ("renewal", "friendship")),
    ("Treasure Island", "Robert Louis Stevenson", "Jim Hawkins sails after buried gold and matches wits with Long John Silver.", ("adventure", "trust")),
    ("Anne of Green Gables", "L. M. Montgomery", "Talkative Anne turns a quiet farm on Prince Edward Island upside down.", ("imagination", "belonging")),
    ("The Wind in the Willows", "Kenneth Grahame", "Mole, Rat, Badger and the incorrigible Toad mess about in boats and motorcars.", ("friendship", "home")),
)

SUBJECTS = ("Fox", "Lighthouse", "Kite", "River", "Clockmaker", "Comet", "Garden", "Whale", "Lantern", "Mapmaker")
PLACES = ("Harbor", "Meadow", "Northwood", "Island", "Old Town", "Valley", "Observatory", "Market", "Cliffs", "Delta")


def make_profile(i: int) -> ChildProfile:
    if i == 0:
        return ChildProfile(
            id="c000",
            name="Jip",
            age=10,
            interests=("sailing", "maps"),
            reading_prefs=("adventure", "humor"),
            favorite_motifs=("pirates",),
        )
    name = FIRST_NAMES[i % len(FIRST_NAMES)]
    if i >= len(FIRST_NAMES):
        name = f"{name} {chr(ord('A') + (i // len(FIRST_NAMES)) - 1)}."
    return ChildProfile(
        id=f"c{i:03d}",
        name=name,
        age=9 + i % 3,
        interests=INTEREST_POOL[i % len(INTEREST_POOL)],
        reading_prefs=READING_PREFS[i % len(READING_PREFS)],
        favorite_motifs=MOTIF_POOL[i % len(MOTIF_POOL)],
    )


def make_book(i: int) -> BookMeta:
    if i < len(CLASSIC_BOOKS):
        title, author, summary, themes = CLASSIC_BOOKS[i]
    else:
        subject = SUBJECTS[i % len(SUBJECTS)]
        place = PLACES[(i // len(SUBJECTS)) % len(PLACES)]
        title = f"The {subject} of {place}"
        author = f"{FIRST_NAMES[i % len(FIRST_NAMES)]} Story"
        summary = f"A young hero follows the {subject.lower()} across {place.lower()} and finds more than they were looking for."
        themes = ("adventure", "discovery")
    return BookMeta(id=f"b{i:03d}", title=title, author=author, summary=summary, themes=themes, age_range=(9, 11))


def build_cohort(n: int) -> Cohort:
    profiles = tuple(make_profile(i) for i in range(n))
    books = tuple(make_book(i) for i in range(n))
    assignment = {f"c{i:03d}": f"b{i:03d}" for i in range(n)}
    return Cohort(profiles=profiles, books=books, assignment=assignment)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Write a deterministic demo cohort directory.")
    parser.add_argument("--out", required=True, help="cohort directory to create")
    parser.add_argument("--children", type=int, default=100)
    args = parser.parse_args(argv)
    if args.children < 1:
        parser.error("--children must be >= 1")
    cohort = build_cohort(args.children)
    save_cohort(args.out, cohort)
    print(f"wrote {len(cohort.profiles)} profiles and {len(cohort.books)} books to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
