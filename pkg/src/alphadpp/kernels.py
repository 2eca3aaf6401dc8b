"""Hermitian kernels on R satisfying the admissibility assumption.

Four analytically controlled families:

========================  =====================================================
``rank-one-indicator``    w 1_S(x) 1_S(y), single eigenvalue w |S|
``finite-rank``           sum_k lam_k phi_k(x) conj(phi_k(y)), phi_k given by
                          Haar coefficients at level 1 (orthonormal)
``gaussian``              c exp(-((x - y) / gamma)**2)
``sine-window``           sin(pi b (x - y)) / (pi (x - y)), diagonal b
========================  =====================================================
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .alphadet import AlphaParam
from .errors import ContractViolation, SpectralViolation
from .quadrature import QuadratureSpec, interval_nodes
from .tree import BasisIndex, TreeIndex, Window, eval_basis

A1_TOL = 1e-8


def _dyadic_level(*points, cap: int = 40) -> int:
    for level in range(1, cap + 1):
        scale = 2.0 ** (level - 1)
        if all(float(p * scale).is_integer() for p in points):
            return level
    raise ContractViolation(f"points {points} are not dyadic rationals")


class KernelSpec:
    """Base class; subclasses implement ``evaluate`` with numpy broadcasting."""

    kind: str = ""
    hermitian = True
    #: dyadic level at which the kernel becomes piecewise smooth (None: smooth)
    breakpoint_level: int | None = None

    def evaluate(self, x, y):
        raise NotImplementedError

    def __call__(self, x, y):
        return self.evaluate(x, y)

    def diagonal(self, x):
        x = np.asarray(x, dtype=float)
        return self.evaluate(x, x).real

    def declared_spectrum(self):
        """Exact nonzero eigenvalues when known analytically, else None."""
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class RankOneIndicator(KernelSpec):
    support: tuple = (0.0, 1.0)
    weight: float = 1.0
    kind = "rank-one-indicator"

    def __post_init__(self):
        lo, hi = map(float, self.support)
        if not lo < hi:
            raise ContractViolation(f"support must satisfy lo < hi, got {self.support}")
        if self.weight < 0:
            raise ContractViolation("rank-one-indicator weight must be nonnegative")
        object.__setattr__(self, "support", (lo, hi))

    @property
    def breakpoint_level(self):
        return _dyadic_level(*self.support)

    def evaluate(self, x, y):
        lo, hi = self.support
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        ix = (x >= lo) & (x < hi)
        iy = (y >= lo) & (y < hi)
        return (self.weight * (ix & iy)).astype(np.complex128)

    def declared_spectrum(self):
        lo, hi = self.support
        return [self.weight * (hi - lo)]

    def to_dict(self):
        return {"kind": self.kind, "support": list(self.support), "weight": self.weight}


@dataclass(frozen=True)
class FiniteRank(KernelSpec):
    """Finite-rank kernel with eigenfunctions expanded in the level-1 basis.

    ``terms`` is a sequence of ``(eigenvalue, {label: coefficient})``; labels
    use the ``(j1;b2...br)`` form.  The coefficient vectors must be
    orthonormal, so the declared eigenvalues are exact.
    """

    terms: tuple
    kind = "finite-rank"
    _basis: tuple = field(init=False, repr=False, compare=False)
    _coef: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        terms = tuple((float(lam), dict(vec)) for lam, vec in self.terms)
        if not terms:
            raise ContractViolation("finite-rank kernel needs at least one term")
        labels = sorted({TreeIndex.parse(lbl) for _, vec in terms for lbl in vec})
        basis = tuple(BasisIndex(1, t) for t in labels)
        pos = {b.index: p for p, b in enumerate(basis)}
        coef = np.zeros((len(terms), len(basis)), dtype=np.complex128)
        for k, (_, vec) in enumerate(terms):
            for lbl, c in vec.items():
                coef[k, pos[TreeIndex.parse(lbl)]] = complex(*c) if isinstance(c, (list, tuple)) else complex(c)
        gram = coef @ coef.conj().T
        if np.max(np.abs(gram - np.eye(len(terms)))) > 1e-10:
            raise ContractViolation("finite-rank eigenfunction coefficients are not orthonormal")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "_basis", basis)
        object.__setattr__(self, "_coef", coef)

    @property
    def eigenvalues(self):
        return [lam for lam, _ in self.terms]

    @property
    def breakpoint_level(self):
        return max(b.index.rank for b in self._basis)

    def eigenfunctions(self, x):
        """Array (k, *x.shape) of eigenfunction values."""
        x = np.asarray(x, dtype=float)
        phi = np.stack([eval_basis(b, x) for b in self._basis])
        return np.tensordot(self._coef, phi, axes=(1, 0))

    def evaluate(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        fx = self.eigenfunctions(x)
        fy = self.eigenfunctions(y)
        lam = np.asarray(self.eigenvalues).reshape((-1,) + (1,) * x.ndim)
        return (lam * fx * fy.conj()).sum(axis=0)

    def declared_spectrum(self):
        return list(self.eigenvalues)

    def to_dict(self):
        def enc(c):
            c = complex(c)
            return c.real if c.imag == 0 else [c.real, c.imag]

        return {
            "kind": self.kind,
            "terms": [
                {"eigenvalue": lam, "coefficients": {k: enc(v) for k, v in vec.items()}}
                for lam, vec in self.terms
            ],
        }


@dataclass(frozen=True)
class Gaussian(KernelSpec):
    scale: float = 1.0
    amplitude: float = 1.0
    kind = "gaussian"

    def __post_init__(self):
        if self.scale <= 0 or self.amplitude < 0:
            raise ContractViolation("gaussian kernel needs scale > 0 and amplitude >= 0")

    def evaluate(self, x, y):
        d = (np.asarray(x, dtype=float) - np.asarray(y, dtype=float)) / self.scale
        return (self.amplitude * np.exp(-d * d)).astype(np.complex128)

    def to_dict(self):
        return {"kind": self.kind, "scale": self.scale, "amplitude": self.amplitude}


@dataclass(frozen=True)
class SineWindow(KernelSpec):
    band: float = 1.0
    kind = "sine-window"

    def __post_init__(self):
        if self.band <= 0:
            raise ContractViolation("sine-window band must be positive")

    def evaluate(self, x, y):
        d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        return (self.band * np.sinc(self.band * d)).astype(np.complex128)

    def to_dict(self):
        return {"kind": self.kind, "band": self.band}


def kernel_from_dict(d: dict) -> KernelSpec:
    """Build a kernel from its config descriptor."""
    if not isinstance(d, dict) or "kind" not in d:
        raise ContractViolation("kernel descriptor must be an object with a 'kind' field")
    kind = d["kind"]
    if kind == "rank-one-indicator":
        return RankOneIndicator(tuple(d.get("support", (0.0, 1.0))), float(d.get("weight", 1.0)))
    if kind == "finite-rank":
        terms = d.get("terms")
        if not terms:
            raise ContractViolation("finite-rank kernel needs a non-empty 'terms' list")
        return FiniteRank(tuple((t["eigenvalue"], t["coefficients"]) for t in terms))
    if kind == "gaussian":
        return Gaussian(float(d.get("scale", 1.0)), float(d.get("amplitude", 1.0)))
    if kind == "sine-window":
        return SineWindow(float(d.get("band", 1.0)))
    raise ContractViolation(
        f"unknown kernel kind {kind!r}; expected rank-one-indicator, finite-rank, gaussian or sine-window"
    )


def eval_kernel(kernel: KernelSpec, x, y):
    out = kernel.evaluate(x, y)
    return complex(out) if np.ndim(out) == 0 else out


def trace_on_window(kernel: KernelSpec, window: Window, quad: QuadratureSpec | None = None) -> float:
    """Integral of K(x, x) over the window, Gauss-Legendre per dyadic cell."""
    quad = quad or QuadratureSpec()
    fine = max(quad.fine_level_for(kernel), _dyadic_level(window.a, window.b))
    x, w = interval_nodes(window.a, window.b, fine, quad.order)
    return float(np.sum(w * kernel.diagonal(x)))


def nystrom_eigenvalues(kernel: KernelSpec, window: Window, n: int) -> np.ndarray:
    """Eigenvalues (descending) of the midpoint-rule discretisation on n points."""
    h = window.length / n
    x = window.a + h * (np.arange(n) + 0.5)
    mat = h * kernel.evaluate(x[:, None], x[None, :])
    mat = 0.5 * (mat + mat.conj().T)
    return np.sort(np.linalg.eigvalsh(mat))[::-1]


@dataclass
class A1Report:
    alpha: AlphaParam
    eigenvalues: np.ndarray
    declared: list | None
    lower: float
    upper: float
    passed: bool
    offending: float | None = None

    def raise_for_violation(self):
        if not self.passed:
            raise SpectralViolation(
                f"eigenvalue {self.offending:.12g} outside [{self.lower:.3g}, {self.upper:.3g}] "
                f"required for alpha={self.alpha}",
                self.offending,
            )

    def to_dict(self):
        return {
            "alpha": str(self.alpha),
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "declared": self.declared,
            "lower": self.lower,
            "upper": self.upper,
            "passed": self.passed,
            "offending": self.offending,
        }


def check_spectrum(eigenvalues, alpha, tol: float = A1_TOL, declared=None) -> A1Report:
    alpha = AlphaParam.parse(alpha)
    ev = np.sort(np.asarray(eigenvalues, dtype=float))[::-1]
    lower, upper = -tol, alpha.spectral_bound + tol
    candidates = list(ev) + list(declared or [])
    bad = [float(v) for v in candidates if v < lower or v > upper]
    offending = max(bad, key=lambda v: max(v - upper, lower - v)) if bad else None
    return A1Report(alpha, ev, declared, lower, upper, offending is None, offending)


def validate_a1(
    kernel: KernelSpec,
    alpha,
    window: Window,
    max_rank: int,
    level: int = 1,
    quad: QuadratureSpec | None = None,
    tol: float = A1_TOL,
) -> A1Report:
    """Spectral admissibility check on the projected matrix at rank R.

    Eigenvalues must lie in [-tol, -1/alpha + tol] for alpha < 0 and in
    [-tol, inf) for alpha > 0.  Declared eigenvalues of analytic kernels
    are checked as well.
    """
    from .projection import project_kernel

    proj = project_kernel(kernel, level, max_rank, window, quad)
    return check_spectrum(proj.eigenvalues(), alpha, tol, kernel.declared_spectrum())
