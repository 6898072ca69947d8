"""CSV interchange for S21 traces, mode tables and plot-ready result tables.

Floats are written with ``repr`` so a write/read cycle is bit exact.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .calibrate import ModeMeasurement
from .exceptions import DomainError
from .netsynth import ComplexTrace

TRACE_HEADER = ("freq_hz", "re_s21", "im_s21")
MODE_HEADER = ("mode_n", "f_r_hz", "q_i")


def _rows(path, header):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise DomainError(f"{path}: empty file") from None
        if tuple(h.strip() for h in first) != header:
            raise DomainError(f"{path}: expected header {','.join(header)}, got {','.join(first)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DomainError(f"{path}:{lineno}: expected {len(header)} fields")
            yield lineno, [c.strip() for c in row]


def _float(text, path, lineno):
    try:
        return float(text)
    except ValueError:
        raise DomainError(f"{path}:{lineno}: not a number: {text!r}") from None


def read_trace_csv(path):
    f, re, im = [], [], []
    for lineno, (a, b, c) in _rows(path, TRACE_HEADER):
        f.append(_float(a, path, lineno))
        re.append(_float(b, path, lineno))
        im.append(_float(c, path, lineno))
    if not f:
        raise DomainError(f"{path}: no data rows")
    return ComplexTrace(np.array(f), np.array(re) + 1j * np.array(im))


def write_trace_csv(path, trace: ComplexTrace):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for f, z in zip(trace.freqs, trace.s21):
            w.writerow((repr(float(f)), repr(float(z.real)), repr(float(z.imag))))


def read_mode_table(path):
    """Mode rows; an empty ``q_i`` cell means the quality factor was not measured."""
    modes = []
    for lineno, (n, f, q) in _rows(path, MODE_HEADER):
        nv = _float(n, path, lineno)
        if nv != int(nv):
            raise DomainError(f"{path}:{lineno}: mode_n must be an integer")
        modes.append(ModeMeasurement(int(nv), _float(f, path, lineno), _float(q, path, lineno) if q else None))
    if not modes:
        raise DomainError(f"{path}: no data rows")
    return modes


def write_mode_table(path, modes):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MODE_HEADER)
        for m in modes:
            w.writerow((m.mode_n, repr(float(m.f_r)), "" if m.q_i is None else repr(float(m.q_i))))


def write_table(path, rows, columns):
    """Write dict rows as CSV with a fixed column order."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in columns])
