"""Reading and writing grids, distribution specs, CSV tables and JSON summaries."""

import csv
import json
import re
from pathlib import Path

import numpy as np

from . import distributions as dist
from .errors import ValidationError
from .quantizer import Grid


def _plain(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj):
    return json.dumps(obj, indent=2, default=_plain, allow_nan=True)


def write_json(path, obj):
    Path(path).write_text(dumps(obj) + "\n")


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read JSON from {path}: {exc}") from exc


def save_grid(grid, path):
    write_json(path, grid.to_json())


def load_grid(path):
    return Grid.from_json(read_json(path))


def parse_dist(text, d=1):
    """Preset name, inline JSON object, or path to a JSON spec file."""
    text = text.strip()
    if text.startswith("{"):
        try:
            return dist.DistributionSpec.from_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed distribution JSON: {exc}") from exc
    if text.lower() in dist.PRESETS:
        return dist.preset(text, d)
    if Path(text).is_file():
        return dist.DistributionSpec.from_json(read_json(text))
    raise ValidationError(f"unknown distribution {text!r}: use a preset "
                          f"({', '.join(sorted(dist.PRESETS))}), JSON, or a JSON file")


_POW = re.compile(r"^2\^(\d+)$")


def _level(token):
    token = token.strip()
    m = _POW.match(token)
    if m:
        return 2 ** int(m.group(1)), True
    try:
        return int(token), False
    except ValueError:
        raise ValidationError(f"bad level {token!r}") from None


def parse_levels(text):
    """``"255,511,1023"``, ``"2^4..2^10"`` (powers of two) or ``"32..40"`` (every integer)."""
    out = []
    for part in text.split(","):
        if ".." in part:
            lo_txt, hi_txt = part.split("..", 1)
            (lo, lo_pow), (hi, hi_pow) = _level(lo_txt), _level(hi_txt)
            if lo_pow and hi_pow:
                out.extend(2 ** k for k in range(lo.bit_length() - 1, hi.bit_length()))
            else:
                out.extend(range(lo, hi + 1))
        elif part.strip():
            out.append(_level(part)[0])
    levels = sorted(set(out))
    if not levels or levels[0] < 1:
        raise ValidationError(f"levels must be positive integers, got {text!r}")
    return levels


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def csv_text(header, rows):
    lines = [",".join(str(h) for h in header)]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    return "\n".join(lines)


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def _num(x):
    x = float(x)
    return str(int(x)) if x.is_integer() else f"{x:g}"


def artifact_stem(experiment, spec, r, s, seed):
    """``{experiment}_{dist}_{r}_{s}_{seed}``."""
    return f"{experiment}_{spec.label()}_{_num(r)}_{_num(s)}_{seed}"


def write_experiment(out_dir, experiment, spec, r, s, seed, header, rows, summary):
    """Write ``<stem>.csv`` and ``<stem>.json``; returns both paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = artifact_stem(experiment, spec, r, s, seed)
    csv_path = out_dir / f"{stem}.csv"
    json_path = out_dir / f"{stem}.json"
    write_csv(csv_path, header, [[_cell(v) for v in row] for row in rows])
    write_json(json_path, dict(summary, experiment=experiment, dist=spec.to_json(),
                               r=r, s=s, seed=seed, csv=csv_path.name))
    return csv_path, json_path
