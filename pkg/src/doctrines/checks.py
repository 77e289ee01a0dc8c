"""A small log of the checks a validator ran, for reports and probe audits."""

from dataclasses import dataclass, field


@dataclass
class Check:
    name: str
    ok: bool
    scope: str = ""
    detail: str = ""
    skipped: bool = False


@dataclass
class CheckLog:
    entries: list = field(default_factory=list)

    def record(self, name, ok=True, scope="", detail=""):
        self.entries.append(Check(name, bool(ok), scope, detail))
        return ok

    def skip(self, name, scope="", detail=""):
        self.entries.append(Check(name, True, scope, detail, skipped=True))

    def extend(self, other):
        self.entries.extend(other.entries)
        return self

    @property
    def ok(self):
        return all(e.ok for e in self.entries)

    def failures(self):
        return [e for e in self.entries if not e.ok]

    def count(self):
        return sum(1 for e in self.entries if not e.skipped)

    def skipped(self):
        return [e for e in self.entries if e.skipped]
