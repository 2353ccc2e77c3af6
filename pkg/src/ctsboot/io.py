"""File formats: sequence files, FASTA protein encoding, model and run configs.

A sequence file holds one series per line as comma-separated labels.  Lines
starting with ``#`` are ``key: value`` headers; ``#alphabet: a,b,c`` fixes
the category set, other keys (``seed``, ``scenario``...) are provenance.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import yaml

from .bootstrap import TestConfig
from .models import HiddenMarkov, MarkovChain, ModelFamily, ModelSpec, Ndarma
from .series import Alphabet, CategoricalSeries, InvalidSeriesError


class InputError(ValueError):
    """Malformed user input; the CLI maps it to exit code 2."""


_HEADER = re.compile(r"^#\s*([A-Za-z_][\w-]*)\s*:\s*(.*)$")


def _sort_labels(labels: Iterable[str]) -> list[str]:
    labels = set(labels)
    if all(re.fullmatch(r"-?\d+", x) for x in labels):
        return sorted(labels, key=int)
    return sorted(labels)


@dataclass
class SequenceFile:
    rows: list[list[str]]
    alphabet: Alphabet | None = None
    meta: dict[str, str] = field(default_factory=dict)

    def resolved_alphabet(self) -> Alphabet:
        if self.alphabet is not None:
            return self.alphabet
        return infer_alphabet(self.rows)

    def to_series(self, alphabet: Alphabet | None = None) -> list[CategoricalSeries]:
        alphabet = alphabet or self.resolved_alphabet()
        out = []
        for k, row in enumerate(self.rows):
            try:
                out.append(CategoricalSeries.from_labels(row, alphabet))
            except InvalidSeriesError as exc:
                raise InputError(f"series {k + 1}: {exc}") from None
        return out


def infer_alphabet(rows: Iterable[Sequence[str]]) -> Alphabet:
    labels = _sort_labels(tok for row in rows for tok in row)
    if len(labels) < 2:
        # a single observed category still needs a two-letter alphabet
        raise InputError(f"cannot infer an alphabet from a single category {labels}; add an #alphabet header")
    return Alphabet(tuple(labels))


def parse_sequences(text: str, source: str = "<text>") -> SequenceFile:
    rows, meta, alphabet = [], {}, None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _HEADER.match(line)
            if m is None:
                continue
            key, value = m.group(1), m.group(2).strip()
            if key == "alphabet":
                try:
                    alphabet = Alphabet(tuple(t.strip() for t in value.split(",")))
                except InvalidSeriesError as exc:
                    raise InputError(f"{source}:{lineno}: {exc}") from None
            else:
                meta[key] = value
            continue
        tokens = [t.strip() for t in line.split(",")]
        if any(t == "" for t in tokens):
            raise InputError(f"{source}:{lineno}: empty token")
        if alphabet is not None:
            bad = [t for t in tokens if t not in alphabet.labels]
            if bad:
                raise InputError(f"{source}:{lineno}: token {bad[0]!r} not in alphabet {','.join(alphabet.labels)}")
        rows.append(tokens)
    return SequenceFile(rows, alphabet, meta)


def read_sequences(path: str | Path) -> SequenceFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    return parse_sequences(text, str(path))


def format_sequences(sf: SequenceFile) -> str:
    lines = []
    if sf.alphabet is not None:
        lines.append("#alphabet: " + ",".join(sf.alphabet.labels))
    lines += [f"#{k}: {v}" for k, v in sf.meta.items()]
    lines += [",".join(row) for row in sf.rows]
    return "\n".join(lines) + "\n"


def sequence_file_of(series: Sequence[CategoricalSeries], meta: dict | None = None) -> SequenceFile:
    alphabet = series[0].alphabet if series else None
    return SequenceFile([s.labels() for s in series], alphabet, dict(meta or {}))


# ---------------------------------------------------------------------------
# proteins

# three hydrophobicity groups: hydrophobic, neutral, polar
HYDROPHOBICITY = {
    **{aa: "1" for aa in "CLVIMFW"},
    **{aa: "2" for aa in "GASTPHY"},
    **{aa: "3" for aa in "RKEDQN"},
}


def load_mapping(path: str | Path) -> dict[str, str]:
    """Read a residue-to-class mapping: ``{class: "LETTERS"}`` or ``{letter: class}``."""
    data = {str(k): str(v) for k, v in load_config(path).items()}
    letters = {k: v.replace(",", "").replace(" ", "") for k, v in data.items()}
    if all(len(k) == 1 and k.isalpha() for k in data) and not any(len(v) > 1 for v in letters.values()):
        return {k.upper(): v for k, v in data.items()}
    return {aa.upper(): k for k, v in letters.items() for aa in v}


def parse_fasta(text: str) -> list[tuple[str, str]]:
    records, name, chunks = [], None, []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith(";"):
            continue
        if line.startswith(">"):
            if name is not None:
                records.append((name, "".join(chunks)))
            name, chunks = line[1:].strip(), []
        else:
            if name is None:
                raise InputError("FASTA data before the first '>' header")
            chunks.append(re.sub(r"\s+", "", line))
    if name is not None:
        records.append((name, "".join(chunks)))
    return records


def encode_protein(text: str, mapping: dict[str, str] | None = None) -> SequenceFile:
    mapping = HYDROPHOBICITY if mapping is None else mapping
    rows, names = [], []
    for name, seq in parse_fasta(text):
        seq = seq.upper().rstrip("*")
        label = name.split()[0] if name.split() else "<unnamed>"
        if not seq:
            raise InputError(f"record {label!r} is empty")
        bad = sorted({c for c in seq if c not in mapping})
        if bad:
            raise InputError(f"record {label!r} contains non-amino-acid symbols {''.join(bad)!r}")
        rows.append([mapping[c] for c in seq])
        names.append(label)
    if not rows:
        raise InputError("no FASTA records found")
    alphabet = Alphabet(tuple(_sort_labels(mapping.values())))
    return SequenceFile(rows, alphabet, {"records": " ".join(names)})


# ---------------------------------------------------------------------------
# configs

def load_config(path: str | Path) -> dict:
    """YAML (or JSON) mapping from a file."""
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise InputError(f"cannot load config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise InputError(f"config {path} must be a mapping")
    return data


def model_spec_from_dict(d: dict) -> ModelSpec:
    family = str(d.get("family", "")).lower()
    try:
        if family == "mc":
            return MarkovChain(np.array(d["transition"], dtype=float))
        if family == "hmm":
            return HiddenMarkov(np.array(d["transition"], dtype=float), np.array(d["emission"], dtype=float))
        if family == "ndarma":
            mixing = np.array(d["mixing"], dtype=float)
            p = int(d.get("p", mixing.size - 1 - int(d.get("q", 0))))
            return Ndarma(np.array(d["pi"], dtype=float), mixing, p, int(d.get("q", 0)))
    except KeyError as exc:
        raise InputError(f"model spec is missing {exc}") from None
    except ValueError as exc:
        raise InputError(f"invalid model spec: {exc}") from None
    raise InputError(f"model family must be mc, hmm or ndarma, got {family!r}")


DEFAULT_ORDER = {"mc": 1, "hmm": 2, "ndarma": 1}


def parse_lags(value) -> tuple[int, ...]:
    if isinstance(value, str):
        value = [v for v in re.split(r"[,\s]+", value) if v]
    if isinstance(value, (int, float)):
        value = [value]
    try:
        return tuple(int(v) for v in value)
    except (TypeError, ValueError):
        raise InputError(f"invalid lag list {value!r}") from None


def test_config_from_dict(d: dict) -> TestConfig:
    """Build a :class:`TestConfig` from flat keys (``metric``, ``method``, ``B``, ``model``, ``order``...)."""
    d = {k.replace("-", "_"): v for k, v in d.items() if v is not None}
    for short, key in (("b", "block_size"), ("p", "cont_prob"), ("jobs", "n_jobs")):
        if short in d:
            d.setdefault(key, d.pop(short))
    model = str(d.pop("model", "mc")).lower()
    order = int(d.pop("order", DEFAULT_ORDER.get(model, 1)))
    if "lags" in d:
        d["lags"] = parse_lags(d["lags"])
    allowed = {"metric", "method", "B", "alpha", "lags", "block_size", "cont_prob", "seed", "n_jobs"}
    unknown = set(d) - allowed
    if unknown:
        raise InputError(f"unknown config keys: {sorted(unknown)}")
    try:
        return TestConfig(family=ModelFamily(model, order), **d)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from None


test_config_from_dict.__test__ = False
