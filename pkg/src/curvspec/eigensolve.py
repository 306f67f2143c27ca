"""Lowest eigenvalues of the assembled pencil and refinement extrapolation.

The scale path is ARPACK shift-invert with a sparse LU of K - sigma*M; small
problems go through the dense LAPACK solver. Extrapolation fits the last
three refinement values to x_n = x + c*r^n and takes x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .fem import EigenProblem

_DENSE_LIMIT = 1200
_TRUST_RATIO = 0.5
_TRUST_JUMP = 0.02


class SolveError(RuntimeError):
    """Eigenvalue solve failed; partial results may be attached."""

    def __init__(self, msg: str, partial=None):
        super().__init__(msg)
        self.partial = partial


@dataclass(frozen=True)
class SpectrumSlice:
    """Ascending lowest eigenvalues at one refinement level."""

    eigenvalues: np.ndarray
    level: int
    residual_norms: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", np.asarray(self.eigenvalues, dtype=float))
        object.__setattr__(
            self, "residual_norms", np.asarray(self.residual_norms, dtype=float)
        )

    def __len__(self) -> int:
        return len(self.eigenvalues)


@dataclass(frozen=True)
class ExtrapolatedSpectrum:
    """Per-index geometric-fit predictions, re-sorted ascending."""

    predicted: np.ndarray
    ratios: np.ndarray
    trusted: np.ndarray
    trust_count: int
    inputs: tuple[SpectrumSlice, SpectrumSlice, SpectrumSlice]

    def __len__(self) -> int:
        return len(self.predicted)


def _residuals(problem: EigenProblem, vals, vecs) -> np.ndarray:
    kv = problem.stiffness @ vecs
    mv = problem.mass @ vecs
    out = np.empty(len(vals))
    for i, lam in enumerate(vals):
        denom = np.linalg.norm(mv[:, i])
        out[i] = np.linalg.norm(kv[:, i] - lam * mv[:, i]) / denom
    return out


def solve_lowest(problem: EigenProblem, m: int, tol: float = 1e-9) -> SpectrumSlice:
    """The m smallest eigenvalues of K v = lambda M v.

    Residuals ||Kv - lambda Mv|| / ||Mv|| must come out below tol*max(1, lambda);
    eigenvalues within tol of zero are reported as exactly 0 (Neumann mode).
    """
    n = problem.dimension
    if m < 1:
        raise SolveError(f"need m >= 1, got {m}")
    if m > n:
        raise SolveError(f"requested {m} eigenvalues of a {n}-dimensional problem")
    if not 0.0 < tol <= 1e-6:
        raise SolveError(f"tol must lie in (0, 1e-6], got {tol}")

    if n <= _DENSE_LIMIT:
        k_dense = problem.stiffness.toarray()
        m_dense = problem.mass.toarray()
        vals, vecs = sla.eigh(k_dense, m_dense)
        vals, vecs = vals[:m], vecs[:, :m]
    elif m >= n - 1:
        raise SolveError(
            f"nearly full spectrum ({m} of {n}) is outside the iterative solver's "
            "range; refine less or request fewer eigenvalues"
        )
    else:
        # shift below the spectrum, scaled by the Weyl estimate of lambda_1
        area = problem.mass.sum()
        sigma = -0.5 * max(4.0 * math.pi / area, 1e-8)
        rng = np.random.default_rng(7151)
        v0 = rng.uniform(-1.0, 1.0, n)
        vals = vecs = None
        for attempt in range(3):
            try:
                vals, vecs = spla.eigsh(
                    problem.stiffness,
                    k=m,
                    M=problem.mass,
                    sigma=sigma,
                    which="LM",
                    v0=v0,
                    tol=0,
                )
                break
            except spla.ArpackNoConvergence as exc:
                partial = SpectrumSlice(
                    np.sort(exc.eigenvalues), level=-1, residual_norms=np.array([])
                )
                raise SolveError(
                    f"eigensolver converged only {len(exc.eigenvalues)}/{m} eigenvalues",
                    partial=partial,
                ) from exc
            except RuntimeError:
                if attempt == 2:
                    raise SolveError("shifted factorization failed repeatedly") from None
                sigma *= 4.0  # retry with a pivot further from the spectrum

    order = np.argsort(vals)
    vals = np.asarray(vals)[order]
    vecs = np.asarray(vecs)[:, order]
    res = _residuals(problem, vals, vecs)

    scale = max(1.0, float(abs(vals[-1])))
    if np.any(vals < -tol * scale):
        raise SolveError(f"negative eigenvalue {vals.min():.3e} beyond tolerance")
    vals = np.where(np.abs(vals) < tol * scale, 0.0, vals)

    bad = res > tol * np.maximum(1.0, np.abs(vals))
    if np.any(bad):
        worst = float(res[bad].max())
        raise SolveError(
            f"{int(bad.sum())} residuals exceed tolerance (worst {worst:.3e})",
            partial=SpectrumSlice(vals, level=-1, residual_norms=res),
        )
    return SpectrumSlice(eigenvalues=vals, level=-1, residual_norms=res)


def extrapolate(x4: float, x5: float, x6: float) -> tuple[float, float]:
    """Fit x_n = x + c r^n to three consecutive values and return (x, r).

    Degenerate fits (|r| >= 1 or r ~ 1) return the finest value with the raw
    ratio; the trust decision is made downstream from the ratio.
    """
    if x5 == x4:
        return (x6, 0.0)
    r = (x6 - x5) / (x5 - x4)
    if abs(r) >= 1.0 or abs(1.0 - r) < 1e-12:
        return (x6, r)
    return (x6 + (x6 - x5) * r / (1.0 - r), r)


def extrapolate_spectrum(slices) -> ExtrapolatedSpectrum:
    """Extrapolate each eigenvalue index over the last three refinement levels.

    Predictions are re-sorted ascending (per-index order can switch);
    trust_count is the longest prefix with |r| <= 0.5 and a relative jump
    from the finest value of at most 2%.
    """
    slices = tuple(slices)
    if len(slices) != 3:
        raise SolveError(f"extrapolation needs exactly 3 slices, got {len(slices)}")
    s4, s5, s6 = slices
    if not (len(s4) == len(s5) == len(s6)):
        raise SolveError(
            f"mismatched eigenvalue counts: {len(s4)}, {len(s5)}, {len(s6)}"
        )
    if not (s5.level == s4.level + 1 and s6.level == s5.level + 1):
        raise SolveError(
            f"slices must be at consecutive levels, got {s4.level}, {s5.level}, {s6.level}"
        )
    preds = np.empty(len(s6))
    ratios = np.empty(len(s6))
    trusted = np.empty(len(s6), dtype=bool)
    for i in range(len(s6)):
        pred, r = extrapolate(
            float(s4.eigenvalues[i]), float(s5.eigenvalues[i]), float(s6.eigenvalues[i])
        )
        preds[i] = pred
        ratios[i] = r
        trusted[i] = abs(r) <= _TRUST_RATIO and abs(pred - s6.eigenvalues[i]) <= (
            _TRUST_JUMP * (1.0 + abs(pred))
        )
    order = np.argsort(preds, kind="stable")
    preds, ratios, trusted = preds[order], ratios[order], trusted[order]
    trust_count = int(np.argmin(trusted)) if not trusted.all() else len(trusted)
    return ExtrapolatedSpectrum(
        predicted=preds,
        ratios=ratios,
        trusted=trusted,
        trust_count=trust_count,
        inputs=slices,
    )


# ---------------------------------------------------------------------------
# Spectrum file format: one row per eigenvalue, mirroring the refinement tables


@dataclass
class SpectrumFile:
    """Parsed spectrum file: per-level values plus prediction columns."""

    level_ids: list[int]
    levels: list[np.ndarray]
    predicted: np.ndarray
    ratio: np.ndarray
    trusted: np.ndarray

    def trusted_prefix(self) -> np.ndarray:
        """Predicted eigenvalues up to the first untrusted entry."""
        if self.trusted.all():
            return self.predicted
        return self.predicted[: int(np.argmin(self.trusted))]


def write_spectrum_file(
    path,
    predicted: np.ndarray,
    ratio: np.ndarray,
    trusted: np.ndarray,
    levels=(),
    level_ids=(),
) -> None:
    """Rows: index, per-level values (0 where a level had fewer modes),
    predicted, ratio, trusted flag."""
    m = len(predicted)
    cols = ["index"] + [f"level_{l}" for l in level_ids] + ["predicted", "ratio", "trusted"]
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(m):
            row = [str(i + 1)]
            for lev in levels:
                row.append(f"{lev[i]:.17g}" if i < len(lev) else "0")
            row.append(f"{predicted[i]:.17g}")
            row.append(f"{ratio[i]:.17g}")
            row.append("1" if trusted[i] else "0")
            fh.write(",".join(row) + "\n")


def read_spectrum_file(path) -> SpectrumFile:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
        if header[:1] != ["index"] or header[-3:] != ["predicted", "ratio", "trusted"]:
            raise SolveError(f"{path}:1: not a spectrum file (columns {header})")
        level_ids = [int(c.split("_", 1)[1]) for c in header[1:-3]]
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(header):
                raise SolveError(
                    f"{path}:{lineno}: expected {len(header)} columns, got {len(parts)}"
                )
            try:
                rows.append([float(x) for x in parts])
            except ValueError:
                raise SolveError(f"{path}:{lineno}: malformed number in {line!r}") from None
    data = np.asarray(rows, dtype=float).reshape(len(rows), len(header))
    levels = [data[:, 1 + k] for k in range(len(level_ids))]
    return SpectrumFile(
        level_ids=level_ids,
        levels=levels,
        predicted=data[:, -3],
        ratio=data[:, -2],
        trusted=data[:, -1] != 0.0,
    )
