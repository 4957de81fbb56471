"""
Run transcripts: append-only event logs written as JSON lines.

Every event carries a sequence number, a timestamp, the pipeline stage and a
kind. Timestamps are the only non-deterministic field; `deterministic_lines`
drops them so scripted runs can be compared byte for byte.

"""
import json
import time
from dataclasses import dataclass, field
from os import makedirs
from os.path import dirname
from threading import Lock
from typing import Any, Dict, List


PROMPT_VERSION = "prompt_version"
LLM_REQUEST = "llm_request"
LLM_RESPONSE = "llm_response"
SKETCH_REPORT = "sketch_report"
PRIMITIVES = "primitives"
HINTS = "hints"
COMPILE_RESULT = "compile_result"
DIAGNOSTIC = "diagnostic"
CASE_RESULT = "case_result"
SKETCH_VERDICT = "sketch_verdict"
GENERATED_CASES = "generated_cases"
STAGE = "stage"
OUTCOME = "outcome"
ERROR = "error"


@dataclass
class Event:
    seq: int
    ts: float
    stage: str
    kind: str
    payload: Dict[str, Any]

    def to_dict(self, timestamps=True):
        record = {"seq": self.seq, "ts": self.ts, "stage": self.stage, "kind": self.kind, "payload": self.payload}
        if not timestamps:
            del record["ts"]
        return record


@dataclass
class Transcript:
    events: List[Event] = field(default_factory=list)
    lock: Lock = field(default_factory=Lock, repr=False, compare=False)

    def record(self, stage, kind, /, **payload):
        with self.lock:
            event = Event(len(self.events), time.time(), stage, kind, payload)
            self.events.append(event)
        return event

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def of_kind(self, kind):
        return [event for event in self.events if event.kind == kind]

    def lines(self, timestamps=True):
        return [
            json.dumps(event.to_dict(timestamps), sort_keys=True, ensure_ascii=False, default=str)
            for event in self.events
        ]

    def deterministic_lines(self):
        return self.lines(timestamps=False)

    def write(self, path):
        makedirs(dirname(path) or ".", exist_ok=True)
        with open(path, "w") as stream:
            for line in self.lines():
                stream.write(line + "\n")
        return path


def read_transcript(path):
    transcript = Transcript()
    with open(path) as stream:
        for line in stream:
            if line.strip():
                record = json.loads(line)
                transcript.events.append(Event(
                    record["seq"],
                    record.get("ts", 0.),
                    record["stage"],
                    record["kind"],
                    record["payload"],
                ))
    return transcript
