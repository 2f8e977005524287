"""Exception hierarchy shared by all pipeline stages.

Every error carries enough structure for the CLI to emit a machine-readable
JSON object on stderr.
"""

from __future__ import annotations


class DragomanError(Exception):
    """Base class for all toolkit errors."""

    def payload(self) -> dict:
        return {"error": type(self).__name__, "detail": str(self)}


class ConfigError(DragomanError):
    pass


class MalformedLine(DragomanError):
    def __init__(self, path: str, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = path
        self.line_no = line_no
        self.reason = reason


class AlignmentMismatch(DragomanError):
    pass


class DuplicateId(DragomanError):
    def __init__(self, record_id: int, where: str = ""):
        suffix = f" in {where}" if where else ""
        super().__init__(f"duplicate record id {record_id}{suffix}")
        self.record_id = record_id


class NonFiniteScore(DragomanError):
    def __init__(self, record_id: int, key: str):
        super().__init__(f"non-finite value for score '{key}' of record {record_id}")
        self.record_id = record_id
        self.key = key


class MissingScore(DragomanError):
    def __init__(self, record_id: int, key: str):
        super().__init__(f"record {record_id} lacks required score '{key}'")
        self.record_id = record_id
        self.key = key


class EmptyTrainingSet(DragomanError):
    pass


class EmptyText(DragomanError):
    pass


class EmptyCorpus(DragomanError):
    pass


class CorpusTooSmall(DragomanError):
    pass


class EmptyFold(DragomanError):
    pass


class UnknownPreset(DragomanError):
    def __init__(self, name: str):
        super().__init__(f"unknown filter preset '{name}'")
        self.name = name


class EmptyHypotheses(DragomanError):
    pass


class MissingReference(DragomanError):
    def __init__(self, record_id: int):
        super().__init__(f"no reference for n-best list id {record_id}")
        self.record_id = record_id


class EmptySource(DragomanError):
    pass


class EmptyQuery(DragomanError):
    pass


class PoolTooSmall(DragomanError):
    pass


class LineCountMismatch(DragomanError):
    pass
