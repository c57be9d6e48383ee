"""Results tables and CSV emission."""
import csv
import io
import math
from dataclasses import dataclass, field

from ..errors import IoError, UnknownColumn


@dataclass
class ResultsTable:
    columns: list
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, **values):
        missing = [c for c in self.columns if c not in values]
        if missing:
            raise UnknownColumn(f"row lacks columns {missing}")
        extra = [k for k in values if k not in self.columns]
        if extra:
            raise UnknownColumn(f"unknown columns {extra}")
        self.rows.append(tuple(values[c] for c in self.columns))

    def column(self, name):
        if name not in self.columns:
            raise UnknownColumn(f"no column {name!r}; have {self.columns}")
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def where(self, **equal):
        for name in equal:
            if name not in self.columns:
                raise UnknownColumn(f"no column {name!r}")
        idx = [self.columns.index(k) for k in equal]
        vals = list(equal.values())
        rows = [r for r in self.rows if all(r[i] == v for i, v in zip(idx, vals))]
        return ResultsTable(list(self.columns), rows, dict(self.metadata))


def format_value(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.17g}"
    if hasattr(v, "dtype"):
        return format_value(v.item())
    return str(v)


def parse_value(text):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return {"true": True, "false": False}.get(text, text)


def to_csv_text(table):
    buf = io.StringIO()
    for key, value in table.metadata.items():
        buf.write(f"# {key}: {value}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def emit_csv(table, path):
    """Write metadata as '#' lines, then a header and one line per row (17 significant digits)."""
    try:
        with open(path, "w", newline="") as fh:
            fh.write(to_csv_text(table))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_csv(path):
    metadata = {}
    lines = []
    try:
        with open(path, newline="") as fh:
            for line in fh:
                if line.startswith("#"):
                    key, _, value = line[1:].strip().partition(": ")
                    metadata[key] = value
                else:
                    lines.append(line)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    reader = csv.reader(lines)
    columns = next(reader, [])
    rows = [tuple(parse_value(v) for v in r) for r in reader]
    return ResultsTable(columns, rows, metadata)
