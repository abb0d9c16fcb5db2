"""Trial logs: an append-only event stream with one JSON record per line.

The first line is a schema-versioned header embedding the full trial
configuration (scenario text included), so a log alone is enough to re-run
the trial and compare byte-for-byte.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

SCHEMA_VERSION = 1


class IncompleteLog(ValueError):
    pass


def canonical_dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def config_digest(config: dict) -> str:
    return hashlib.sha256(canonical_dumps(config).encode()).hexdigest()


@dataclass
class TrialLog:
    header: dict
    events: list[dict] = field(default_factory=list)
    footer: dict | None = None

    @property
    def mode(self) -> str:
        return self.header["mode"]

    @property
    def seed(self) -> int:
        return self.header["seed"]

    @property
    def termination(self) -> str:
        if self.footer is None:
            raise IncompleteLog("trial log has no footer")
        return self.footer["reason"]

    def progress(self) -> tuple[int, int, int]:
        if self.footer is None:
            raise IncompleteLog("trial log has no footer")
        collected = self.footer["collected"]
        return (collected["whole"], collected["level1"], collected["level2"])

    def records(self) -> list[dict]:
        out = [self.header]
        out.extend(self.events)
        if self.footer is not None:
            out.append(self.footer)
        return out

    def to_jsonl(self) -> str:
        return "\n".join(canonical_dumps(record) for record in self.records()) + "\n"

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(self.to_jsonl())

    def events_of(self, *types: str) -> list[dict]:
        return [event for event in self.events if event["type"] in types]

    @staticmethod
    def parse(text: str) -> "TrialLog":
        records = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise IncompleteLog(f"line {lineno} is not valid JSON: {exc}") from exc
        if not records or records[0].get("type") != "trial_header":
            raise IncompleteLog("log does not start with a trial_header record")
        header = records[0]
        if header.get("version") != SCHEMA_VERSION:
            raise IncompleteLog(f"unsupported log schema version {header.get('version')!r}")
        footer = None
        events = records[1:]
        if events and events[-1].get("type") == "trial_footer":
            footer = events.pop()
        return TrialLog(header=header, events=events, footer=footer)

    @staticmethod
    def load(path: str) -> "TrialLog":
        with open(path, "r", encoding="utf-8") as handle:
            return TrialLog.parse(handle.read())


class JsonlLogWriter:
    """Streams trial records to disk as they happen (trial-hooks shaped).

    The file is append-only while the trial runs, so a crash leaves a
    parseable prefix; a completed file is byte-identical to
    ``TrialLog.to_jsonl()``.
    """

    def __init__(self, path: str) -> None:
        self.path = path
        self._handle = open(path, "w", encoding="utf-8")

    def _write(self, record: dict) -> None:
        if self._handle.closed:
            return
        self._handle.write(canonical_dumps(record) + "\n")
        self._handle.flush()

    def on_header(self, header: dict) -> None:
        self._write(header)

    def on_event(self, event: dict, world) -> None:
        self._write(event)
        if event.get("type") == "trial_footer":
            self.close()

    def on_tick(self, world) -> None:
        pass

    def on_help(self, request, world) -> None:
        pass

    def on_resume(self, request_id: str) -> None:
        pass

    def on_operator_error(self, error: str) -> None:
        pass

    def close(self) -> None:
        if not self._handle.closed:
            self._handle.close()


@dataclass(frozen=True)
class LogDiff:
    seq: int  # index of the first differing record, 0-based over all lines
    expected: str
    actual: str

    def to_dict(self) -> dict:
        return {"seq": self.seq, "expected": self.expected, "actual": self.actual}


def diff_logs(original: TrialLog, regenerated: TrialLog) -> LogDiff | None:
    """First differing record between two logs, or None when byte-identical."""
    left = original.to_jsonl().splitlines()
    right = regenerated.to_jsonl().splitlines()
    for index in range(max(len(left), len(right))):
        expected = left[index] if index < len(left) else "<missing>"
        actual = right[index] if index < len(right) else "<missing>"
        if expected != actual:
            return LogDiff(seq=index, expected=expected, actual=actual)
    return None
