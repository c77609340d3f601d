"""Domain types for multi-view captioning samples and manifest I/O.

A sample bundles the videos of one traffic scenario with exactly one
reference description, the object it describes, the annotated phase, and
the event window in seconds. All types are immutable after construction
and safe to share across threads.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

from .errors import EmptyWindowError, ManifestParseError, ManifestValidationError

FPS = 1  # frames are sampled at one per second; second index == frame index


class Segment(enum.IntEnum):
    """The five temporal phases of a traffic scenario, in canonical order."""

    PRE_RECOGNITION = 0
    RECOGNITION = 1
    JUDGMENT = 2
    ACTION = 3
    AVOIDANCE = 4

    @property
    def canonical(self) -> str:
        return _SEGMENT_NAMES[self.value]

    @classmethod
    def parse(cls, text: str) -> "Segment":
        try:
            return cls(_SEGMENT_INDEX[text.strip().lower()])
        except KeyError:
            raise ValueError(f"unknown segment {text!r}") from None


_SEGMENT_NAMES = ["pre-recognition", "recognition", "judgment", "action", "avoidance"]
_SEGMENT_INDEX = {name: i for i, name in enumerate(_SEGMENT_NAMES)}


class TargetObject(enum.IntEnum):
    """Which participant the caption describes."""

    PEDESTRIAN = 0
    VEHICLE = 1

    @property
    def canonical(self) -> str:
        return "pedestrian" if self is TargetObject.PEDESTRIAN else "vehicle"

    @classmethod
    def parse(cls, text: str) -> "TargetObject":
        t = text.strip().lower()
        if t == "pedestrian":
            return cls.PEDESTRIAN
        if t == "vehicle":
            return cls.VEHICLE
        raise ValueError(f"unknown target object {text!r}")


NUM_TASKS = len(TargetObject) * len(Segment)  # 10


def task_id(obj: TargetObject, segment: Segment) -> int:
    """Index of the (object, segment) pair into the 10-row task table.

    Layout is object*5 + segment; bijective over the 10 pairs.
    """
    return int(obj) * len(Segment) + int(segment)


def task_from_id(tid: int) -> tuple[TargetObject, Segment]:
    """Inverse of task_id."""
    if not 0 <= tid < NUM_TASKS:
        raise ValueError(f"task id {tid} out of range [0, {NUM_TASKS})")
    return TargetObject(tid // len(Segment)), Segment(tid % len(Segment))


@dataclass(frozen=True)
class Sample:
    """One captioning instance: multi-view frame sequences plus one reference.

    start_s/end_s are integer seconds on the shared time origin of all views
    (all videos of a scenario start simultaneously).
    """

    id: str
    video_refs: tuple[str, ...]
    caption: str
    object: TargetObject
    segment: Segment
    start_s: int
    end_s: int

    def __post_init__(self):
        if len(self.video_refs) < 1:
            raise ManifestValidationError(
                f"sample {self.id!r}: needs at least one video", self.id, "videos"
            )
        if not self.caption.strip():
            raise ManifestValidationError(
                f"sample {self.id!r}: caption is empty", self.id, "caption"
            )
        if self.start_s < 0:
            raise ManifestValidationError(
                f"sample {self.id!r}: start_s {self.start_s} < 0", self.id, "start_s"
            )
        if self.start_s > self.end_s:
            raise ManifestValidationError(
                f"sample {self.id!r}: start_s {self.start_s} > end_s {self.end_s}",
                self.id,
                "start_s",
            )

    @property
    def n_views(self) -> int:
        return len(self.video_refs)


@dataclass(frozen=True)
class Manifest:
    """A named list of samples with the fixed 1 fps sampling policy."""

    dataset: str
    samples: tuple[Sample, ...]
    fps: int = FPS

    def __post_init__(self):
        if self.fps != FPS:
            raise ManifestValidationError(f"fps must be {FPS}, got {self.fps}", field="fps")
        seen = set()
        for s in self.samples:
            if s.id in seen:
                raise ManifestValidationError(
                    f"duplicate sample id {s.id!r}", s.id, "id"
                )
            seen.add(s.id)

    def by_id(self, sample_id: str) -> Sample:
        for s in self.samples:
            if s.id == sample_id:
                return s
        raise KeyError(sample_id)


def _require(record: dict, key: str, kind, sample_id: str):
    if key not in record:
        raise ManifestValidationError(
            f"sample {sample_id!r}: missing field {key!r}", sample_id, key
        )
    value = record[key]
    if kind is int:
        # bool is an int subclass; reject it explicitly
        if isinstance(value, bool) or not isinstance(value, int):
            raise ManifestValidationError(
                f"sample {sample_id!r}: field {key!r} must be an integer", sample_id, key
            )
    elif not isinstance(value, kind):
        raise ManifestValidationError(
            f"sample {sample_id!r}: field {key!r} has wrong type", sample_id, key
        )
    return value


def parse_manifest(text: str) -> Manifest:
    """Parse and validate a manifest JSON document.

    Raises ManifestParseError (with byte offset) on malformed JSON and
    ManifestValidationError (naming sample id and field) on invalid records.
    Sample order is preserved.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ManifestParseError(f"malformed JSON at byte {e.pos}: {e.msg}", e.pos) from e
    if not isinstance(doc, dict):
        raise ManifestValidationError("top level must be an object", field="")
    for key in ("dataset", "fps", "samples"):
        if key not in doc:
            raise ManifestValidationError(f"missing top-level field {key!r}", field=key)
    if doc["fps"] != FPS:
        raise ManifestValidationError(f"fps must be {FPS}, got {doc['fps']!r}", field="fps")
    if not isinstance(doc["samples"], list):
        raise ManifestValidationError("samples must be a list", field="samples")

    samples = []
    for record in doc["samples"]:
        if not isinstance(record, dict):
            raise ManifestValidationError("sample record must be an object", field="samples")
        sid = record.get("id")
        if not isinstance(sid, str) or not sid:
            raise ManifestValidationError("sample with missing or empty id", sid, "id")
        videos = _require(record, "videos", list, sid)
        if not all(isinstance(v, str) for v in videos):
            raise ManifestValidationError(
                f"sample {sid!r}: videos must be strings", sid, "videos"
            )
        caption = _require(record, "caption", str, sid)
        try:
            obj = TargetObject.parse(_require(record, "object", str, sid))
        except ValueError as e:
            raise ManifestValidationError(f"sample {sid!r}: {e}", sid, "object") from None
        try:
            segment = Segment.parse(_require(record, "segment", str, sid))
        except ValueError as e:
            raise ManifestValidationError(f"sample {sid!r}: {e}", sid, "segment") from None
        start_s = _require(record, "start_s", int, sid)
        end_s = _require(record, "end_s", int, sid)
        samples.append(
            Sample(
                id=sid,
                video_refs=tuple(videos),
                caption=caption,
                object=obj,
                segment=segment,
                start_s=start_s,
                end_s=end_s,
            )
        )
    return Manifest(dataset=str(doc["dataset"]), samples=tuple(samples))


def serialize_manifest(manifest: Manifest) -> str:
    """Render a Manifest back to its JSON document form (UTF-8, field-exact)."""
    doc = {
        "dataset": manifest.dataset,
        "fps": manifest.fps,
        "samples": [
            {
                "id": s.id,
                "videos": list(s.video_refs),
                "caption": s.caption,
                "object": s.object.canonical,
                "segment": s.segment.canonical,
                "start_s": s.start_s,
                "end_s": s.end_s,
            }
            for s in manifest.samples
        ],
    }
    return json.dumps(doc, ensure_ascii=False, indent=2)


def slice_event(sample: Sample, total_frames: int) -> tuple[int, int]:
    """Inclusive frame index range [m, n] of the event window.

    At 1 fps the second index equals the frame index. The end is clamped to
    the last available frame (views may finish sooner than annotated); a
    start past the last frame is an error.
    """
    if total_frames < 1:
        raise ValueError(f"total_frames must be >= 1, got {total_frames}")
    if sample.start_s > total_frames - 1:
        raise EmptyWindowError(
            f"sample {sample.id!r}: window starts at {sample.start_s}s but only "
            f"{total_frames} frames exist"
        )
    return sample.start_s, min(sample.end_s, total_frames - 1)
