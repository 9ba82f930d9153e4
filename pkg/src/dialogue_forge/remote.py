"""Opt-in HTTP adapters for a real generator and judge.

Never used by default: the CLI only constructs these when --real-clients is
given and the endpoint variables are set. Raw responses are archived so a
human can audit exactly what came back.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import requests

from .genpipe import GeneratorClient, PromptSpec, render_prompt
from .validator import CRITERIA, JudgeClient, RubricScore

GENERATOR_URL_ENV = "DIALOGUE_FORGE_GENERATOR_URL"
GENERATOR_KEY_ENV = "DIALOGUE_FORGE_GENERATOR_KEY"
JUDGE_URL_ENV = "DIALOGUE_FORGE_JUDGE_URL"
JUDGE_KEY_ENV = "DIALOGUE_FORGE_JUDGE_KEY"


def render_judge_prompt(text: str, context: PromptSpec) -> str:
    lines = [
        "Score the following robot utterance for a child reader.",
        f"Utterance: {text}",
        "Generation context:",
        render_prompt(context),
        "Return a JSON object with integer scores 1-5 for: " + ", ".join(CRITERIA) + ".",
    ]
    return "\n".join(lines)


def _archive(archive_dir: Path | None, kind: str, payload: dict, response_body: str) -> None:
    if archive_dir is None:
        return
    archive_dir.mkdir(parents=True, exist_ok=True)
    digest = hashlib.sha256((json.dumps(payload, sort_keys=True) + response_body).encode("utf-8")).hexdigest()[:16]
    record = {"request": payload, "response": response_body}
    (archive_dir / f"{kind}-{digest}.json").write_text(
        json.dumps(record, sort_keys=True, ensure_ascii=False, indent=2), encoding="utf-8"
    )


def _headers(key: str | None) -> dict:
    headers = {"Content-Type": "application/json"}
    if key:
        headers["Authorization"] = f"Bearer {key}"
    return headers


class RemoteGenerator(GeneratorClient):
    def __init__(self, url: str, key: str | None = None, archive_dir: Path | str | None = None, timeout: float = 30.0):
        self._url = url
        self._key = key
        self._archive_dir = Path(archive_dir) if archive_dir else None
        self._timeout = timeout

    def generate(self, spec: PromptSpec, seed: int) -> str:
        payload = {"prompt": render_prompt(spec), "seed": seed}
        response = requests.post(self._url, json=payload, headers=_headers(self._key), timeout=self._timeout)
        response.raise_for_status()
        _archive(self._archive_dir, "generate", payload, response.text)
        return response.json()["text"]

    def identity(self) -> str:
        return f"remote-generator@{self._url}"


class RemoteJudge(JudgeClient):
    def __init__(self, url: str, key: str | None = None, archive_dir: Path | str | None = None, timeout: float = 30.0):
        self._url = url
        self._key = key
        self._archive_dir = Path(archive_dir) if archive_dir else None
        self._timeout = timeout

    def score(self, text: str, context: PromptSpec) -> RubricScore:
        payload = {"prompt": render_judge_prompt(text, context), "text": text}
        response = requests.post(self._url, json=payload, headers=_headers(self._key), timeout=self._timeout)
        response.raise_for_status()
        _archive(self._archive_dir, "judge", payload, response.text)
        body = response.json()
        return RubricScore(**{name: int(body[name]) for name in CRITERIA})

    def identity(self) -> str:
        return f"remote-judge@{self._url}"
