from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..qubo import QuboInstance, bits_from_string, bits_to_string, qubo_energy

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> tuple[int, int]:
    """One splitmix64 step: returns ``(new_state, output)``."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return x, z ^ (z >> 31)


def stream_seeds(seed: int, count: int, stream: int = 0) -> np.ndarray:
    """xoshiro256** states for ``count`` restarts, keyed by ``(seed, stream, index)``."""
    out = np.empty((count, 4), dtype=np.uint64)
    _, base = splitmix64((seed & _MASK) ^ ((stream * 0xD1B54A32D192ED03) & _MASK))
    for r in range(count):
        x, _ = splitmix64(base ^ ((r * 0x9E3779B97F4A7C15) & _MASK))
        words = []
        for _ in range(4):
            x, z = splitmix64(x)
            words.append(z)
        if not any(words):  # all-zero is a fixed point of xoshiro
            words[0] = 1
        out[r] = words
    return out


def config_digest(cfg) -> str:
    payload = json.dumps(cfg if isinstance(cfg, dict) else cfg.__dict__, sort_keys=True, default=str)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class SampleSet:
    """Bitstrings with energies and multiplicities, plus solver metadata."""

    bits: np.ndarray  # (m, n) uint8
    energies: np.ndarray
    counts: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        self.bits = bits if bits.ndim == 2 else bits.reshape(len(self.energies), -1)
        self.energies = np.asarray(self.energies, dtype=float)
        if len(self.bits) != len(self.energies) or len(self.counts) != len(self.energies):
            raise ValueError("bits, energies and counts must have one entry per record")
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if np.any(self.counts <= 0):
            raise ValueError("record counts must be positive")

    @classmethod
    def from_bits(cls, instance: QuboInstance, bits, metadata: dict | None = None) -> "SampleSet":
        bits = np.asarray(bits, dtype=np.uint8)
        energies = qubo_energy(instance, bits) if len(bits) else np.zeros(0)
        return cls(bits, np.atleast_1d(energies), np.ones(len(bits), dtype=np.int64), dict(metadata or {}))

    def __len__(self):
        return len(self.energies)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def n_bits(self) -> int:
        return self.bits.shape[1]

    def best(self) -> tuple[np.ndarray, float]:
        if not len(self):
            raise ValueError("empty sample set")
        k = int(np.argmin(self.energies))
        return self.bits[k], float(self.energies[k])

    def lowest(self, k: int) -> "SampleSet":
        """The ``k`` lowest-energy distinct records."""
        agg = self.aggregate()
        return SampleSet(agg.bits[:k], agg.energies[:k], agg.counts[:k], dict(self.metadata))

    def aggregate(self) -> "SampleSet":
        """Merge identical bitstrings; records sorted by energy, then bitstring."""
        if not len(self):
            return SampleSet(self.bits, self.energies, self.counts, dict(self.metadata))
        uniq, inverse = np.unique(self.bits, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        counts = np.bincount(inverse, weights=self.counts, minlength=len(uniq)).astype(np.int64)
        energies = np.empty(len(uniq))
        energies[inverse] = self.energies
        keys = [bits_to_string(b) for b in uniq]
        order = sorted(range(len(uniq)), key=lambda i: (energies[i], keys[i]))
        return SampleSet(uniq[order], energies[order], counts[order], dict(self.metadata))

    @staticmethod
    def concatenate(sets: list["SampleSet"], metadata: dict | None = None) -> "SampleSet":
        if not sets:
            raise ValueError("nothing to concatenate")
        return SampleSet(
            np.vstack([s.bits for s in sets]),
            np.concatenate([s.energies for s in sets]),
            np.concatenate([s.counts for s in sets]),
            dict(metadata if metadata is not None else sets[0].metadata),
        )

    def check_energies(self, instance: QuboInstance, atol: float = 1e-9) -> float:
        """Largest deviation between stored energies and a fresh evaluation."""
        if not len(self):
            return 0.0
        return float(np.max(np.abs(qubo_energy(instance, self.bits) - self.energies)))

    # -- CSV ---------------------------------------------------------------

    def to_csv(self, path=None, header_comments: dict | None = None) -> str:
        buf = io.StringIO()
        for key, value in (header_comments or {}).items():
            buf.write(f"# {key}={value}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["bits", "energy", "count"])
        for b, e, c in zip(self.bits, self.energies, self.counts):
            writer.writerow([bits_to_string(b), repr(float(e)), int(c)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "SampleSet":
        meta: dict = {}
        rows = []
        with open(path, newline="") as fh:
            body = []
            for line in fh:
                if line.startswith("#"):
                    key, _, value = line[1:].strip().partition("=")
                    meta[key.strip()] = value.strip()
                else:
                    body.append(line)
        reader = csv.DictReader(body)
        if reader.fieldnames != ["bits", "energy", "count"]:
            raise ValueError(f"{path}: expected columns bits,energy,count, got {reader.fieldnames}")
        for row in reader:
            rows.append((bits_from_string(row["bits"]), float(row["energy"]), int(row["count"])))
        if not rows:
            raise ValueError(f"{path}: no samples")
        bits, energies, counts = zip(*rows)
        return cls(np.vstack(bits), np.array(energies), np.array(counts), meta)
