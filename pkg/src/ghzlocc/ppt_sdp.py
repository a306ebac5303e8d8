"""Optimal discrimination success under PPT (or unrestricted) measurements.

The measurement operators ``M_1..M_n`` are parametrized by real coordinates
``y`` of ``M_1..M_{n-1}`` in an orthonormal Hermitian basis, with
``M_n = I - sum M_i``; completeness is then exact for every iterate. The
problem becomes the standard-form dual SDP

    maximize   b.y
    subject to Z(y) = C - A(y) >= 0      (block diagonal: M_i and, for PPT, M_i^Gamma)

which is solved together with its primal ``min <C, X>, A*(X) = b, X >= 0`` by
an infeasible-primal, feasible-dual path-following method (HKM direction,
Mehrotra predictor-corrector). ``M_i = I/n`` is a strictly feasible start.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .blocks import Bipartition, blocks_for, compact_form
from .errors import InvalidArgument, SdpConvergenceError
from .ghz_basis import StateSet, state_vector
from .qla import DensityOperator, QubitSubset, partial_transpose

MAX_ITER = 200
# converged once every residual is below TOL; iteration continues towards
# TARGET_TOL while rounding allows progress
TOL = 1e-7
TARGET_TOL = 1e-10
MAX_DIM = 64
# primal values at or above this leave the relaxation unable to rule out perfect LOCC discrimination
CERTIFICATE_MARGIN = 1e-4


@dataclass(frozen=True)
class DiscriminationInstance:
    states: tuple[DensityOperator, ...]
    priors: tuple[float, ...]
    cut: Bipartition | None = None

    def __post_init__(self):
        if not self.states:
            raise InvalidArgument("no states to discriminate")
        dims = {s.dim for s in self.states}
        if len(dims) != 1:
            raise InvalidArgument("states have different dimensions")
        if self.states[0].dim > MAX_DIM:
            raise InvalidArgument(f"dimension {self.states[0].dim} exceeds {MAX_DIM}")
        if len(self.priors) != len(self.states):
            raise InvalidArgument("one prior per state required")
        if min(self.priors) < 0 or abs(sum(self.priors) - 1.0) > 1e-12:
            raise InvalidArgument("priors must be non-negative and sum to 1")
        if self.cut is not None and self.cut.num_qubits != self.states[0].num_qubits:
            raise InvalidArgument("cut does not match the states' qubit count")

    @classmethod
    def uniform(cls, states: Sequence[DensityOperator], cut: Bipartition | None = None) -> "DiscriminationInstance":
        n = len(states)
        return cls(tuple(states), tuple([1.0 / n] * n), cut)

    @property
    def dim(self) -> int:
        return self.states[0].dim


@dataclass(frozen=True, eq=False)
class SdpSolution:
    primal_value: float
    dual_value: float
    measurements: tuple[np.ndarray, ...]
    iterations: int
    converged: bool
    residuals: dict[str, float] = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return self.dual_value - self.primal_value

    @property
    def verdict(self) -> str:
        if self.dual_value < 1.0 - CERTIFICATE_MARGIN:
            return "not_perfect_certified"
        return "relaxation_inconclusive"

    def to_dict(self) -> dict:
        return {
            "primal": self.primal_value,
            "dual": self.dual_value,
            "gap": self.gap,
            "converged": self.converged,
            "iterations": self.iterations,
            "verdict": self.verdict,
        }


def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal basis (under ``Re Tr(AB)``) of d x d Hermitian matrices, shape ``(d*d, d, d)``."""
    out = []
    s = 1 / np.sqrt(2)
    for a in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[a, a] = 1.0
        out.append(e)
    for a in range(d):
        for b in range(a + 1, d):
            re = np.zeros((d, d), dtype=complex)
            re[a, b] = re[b, a] = s
            im = np.zeros((d, d), dtype=complex)
            im[a, b], im[b, a] = 1j * s, -1j * s
            out += [re, im]
    return np.array(out)


@dataclass
class _Cone:
    """One PSD block: ``Z = const - mat(coef @ y)``, with ``coef`` a sparse ``(d*d, m)`` matrix."""

    const: np.ndarray
    coef: sp.csc_array

    @property
    def dim(self) -> int:
        return self.const.shape[0]

    def slack(self, y: np.ndarray) -> np.ndarray:
        z = self.const - (self.coef @ y).reshape(self.const.shape)
        return (z + z.conj().T) / 2

    def adjoint(self, x: np.ndarray) -> np.ndarray:
        """``[<A_k, x>]_k`` for Hermitian ``x``."""
        return (self.coef.conj().T @ x.reshape(-1)).real


def _max_step(x: np.ndarray, dx: np.ndarray) -> float:
    low = np.linalg.cholesky(x)
    linv = np.linalg.inv(low)
    lam = np.linalg.eigvalsh(linv @ dx @ linv.conj().T).min()
    return np.inf if lam >= 0 else -1.0 / lam


def _sym(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def _ok(res: dict, tol: float) -> bool:
    return res["primal_infeasibility"] < tol and res["complementarity"] < tol and abs(res["gap"]) < tol


def _solve(cones: list[_Cone], b: np.ndarray, y0: np.ndarray, max_iter: int = MAX_ITER, tol: float = TOL):
    """Maximize ``b.y`` subject to every cone's slack being PSD; ``y0`` must be strictly feasible.

    Iterates towards ``TARGET_TOL`` and stops early when rounding stalls
    progress; the returned iterate is the best one meeting ``tol``, if any.
    """
    y = y0.copy()
    xs = [np.eye(c.dim, dtype=complex) for c in cones]
    total_dim = sum(c.dim for c in cones)
    bnorm = 1.0 + np.linalg.norm(b)
    res: dict = {}
    best = None
    it = 0
    for it in range(max_iter + 1):
        zs = [c.slack(y) for c in cones]
        rp = b - sum(c.adjoint(x) for c, x in zip(cones, xs))
        xz = sum(float(np.vdot(x, z).real) for x, z in zip(xs, zs))
        pobj = float(b @ y)
        dobj = sum(float(np.vdot(c.const, x).real) for c, x in zip(cones, xs))
        res = {
            "primal_infeasibility": float(np.linalg.norm(rp) / bnorm),
            "complementarity": xz,
            "gap": dobj - pobj,
        }
        if _ok(res, tol) and (best is None or xz < best[4]["complementarity"]):
            best = (y, xs, it, True, res)
        if _ok(res, min(tol, TARGET_TOL)) or it == max_iter:
            break
        mu = xz / total_dim
        try:
            zinv = [np.linalg.inv(z) for z in zs]
            schur = np.zeros((len(b), len(b)))
            for c, x, w in zip(cones, xs, zinv):
                kg = (c.coef.T @ np.kron(x, w.T).T).T
                schur += (c.coef.conj().T @ kg).real
            schur = (schur + schur.T) / 2
            try:
                factor = scipy.linalg.cho_factor(schur)
                solve_schur = lambda rhs: scipy.linalg.cho_solve(factor, rhs)
            except np.linalg.LinAlgError:
                # near the optimum rounding can cost the Schur matrix its definiteness
                solve_schur = lambda rhs: np.linalg.lstsq(schur, rhs, rcond=1e-14)[0]

            def direction(rcs):
                rhs = rp - sum(c.adjoint(_sym(r)) for c, r in zip(cones, rcs))
                dy = solve_schur(rhs)
                dzs = [_sym(-(c.coef @ dy).reshape(c.const.shape)) for c in cones]
                dxs = [_sym(r - x @ dz @ w) for r, x, dz, w in zip(rcs, xs, dzs, zinv)]
                return dy, dxs, dzs

            def steps(dxs, dzs):
                ap = min(_max_step(x, dx) for x, dx in zip(xs, dxs))
                ad = min(_max_step(z, dz) for z, dz in zip(zs, dzs))
                return min(1.0, 0.95 * ap), min(1.0, 0.95 * ad)

            # predictor
            dy, dxs, dzs = direction([-x for x in xs])
            ap, ad = steps(dxs, dzs)
            xz_aff = sum(
                float(np.vdot(x + ap * dx, z + ad * dz).real) for x, dx, z, dz in zip(xs, dxs, zs, dzs)
            )
            sigma = min(1.0, max(0.0, xz_aff / xz) ** 3)
            # corrector
            rcs = [sigma * mu * w - x - dx @ dz @ w for x, w, dx, dz in zip(xs, zinv, dxs, dzs)]
            dy, dxs, dzs = direction(rcs)
            ap, ad = steps(dxs, dzs)
        except np.linalg.LinAlgError:
            break
        if max(ap, ad) < 1e-12:
            break
        xs = [_sym(x + ap * dx) for x, dx in zip(xs, dxs)]
        y = y + ad * dy
    if best is not None:
        return best
    return y, xs, it, False, res


def _success_bound(instance: DiscriminationInstance, ppt: bool, max_iter: int) -> SdpSolution:
    n, d = len(instance.states), instance.dim
    weighted = [p * s.matrix for p, s in zip(instance.priors, instance.states)]
    if n == 1:
        return SdpSolution(float(np.trace(weighted[0]).real), float(np.trace(weighted[0]).real),
                           (np.eye(d, dtype=complex),), 0, True, {})
    if ppt and instance.cut is None:
        raise InvalidArgument("a PPT bound needs a cut")
    basis = hermitian_basis(d)
    bmat = basis.reshape(d * d, d * d).T  # column k = vec(B_k)
    nv = d * d
    m = (n - 1) * nv

    def placed(mat, i):
        """``mat`` in the column slot of M_i, as a sparse (d*d, m) matrix."""
        out = sp.lil_array((nv, m), dtype=complex)
        out[:, i * nv:(i + 1) * nv] = mat
        return sp.csc_array(out)

    tiled = lambda mat: sp.csc_array(sp.hstack([sp.csc_array(mat)] * (n - 1)))
    eye = np.eye(d, dtype=complex)
    cones = [_Cone(np.zeros((d, d), dtype=complex), placed(-bmat, i)) for i in range(n - 1)]
    cones.append(_Cone(eye, tiled(bmat)))
    if ppt:
        side = instance.cut.side_a
        tmat = np.stack([partial_transpose(bk, side) for bk in basis]).reshape(nv, nv).T
        cones += [_Cone(np.zeros((d, d), dtype=complex), placed(-tmat, i)) for i in range(n - 1)]
        cones.append(_Cone(partial_transpose(eye, side), tiled(tmat)))

    # objective: sum_{i<n} Tr((C_i - C_n) M_i) + Tr(C_n)
    offset = float(np.trace(weighted[-1]).real)
    b = np.concatenate([np.einsum("kij,ji->k", basis, w - weighted[-1]).real for w in weighted[:-1]])
    y0 = np.concatenate([np.einsum("kij,ji->k", basis, eye / n).real] * (n - 1))

    y, xs, iters, converged, res = _solve(cones, b, y0, max_iter=max_iter)
    if not converged:
        raise SdpConvergenceError(f"no convergence in {max_iter} iterations", res)
    ms = [(bmat @ y[i * nv:(i + 1) * nv]).reshape(d, d) for i in range(n - 1)]
    ms.append(eye - sum(ms))
    ms = [_sym(mi) for mi in ms]
    primal = float(b @ y) + offset
    dual = sum(float(np.vdot(c.const, x).real) for c, x in zip(cones, xs)) + offset
    return SdpSolution(primal, dual, tuple(ms), iters, converged, res)


def ppt_success_bound(instance: DiscriminationInstance, max_iter: int = MAX_ITER) -> SdpSolution:
    """Best average success over measurements whose operators stay PSD under partial transpose across the cut."""
    return _success_bound(instance, ppt=True, max_iter=max_iter)


def global_success_bound(instance: DiscriminationInstance, max_iter: int = MAX_ITER) -> SdpSolution:
    return _success_bound(instance, ppt=False, max_iter=max_iter)


def instance_for(states: StateSet, cut: Bipartition, priors: Sequence[float] | None = None) -> DiscriminationInstance:
    """Discrimination instance for basis members across ``cut``.

    When every member lies in one block of ``cut`` the block's two-qubit compact
    form is used (the relabeling is local and preserves all inner products);
    otherwise the full ``2^N``-dimensional states are used.
    """
    labels = list(states)
    if not labels:
        raise InvalidArgument("empty state set")
    priors = tuple(priors) if priors is not None else tuple([1.0 / len(labels)] * len(labels))
    pairs = {lab.pair_index for lab in labels}
    for block in blocks_for(states.basis, cut):
        if pairs <= set(block.pair_indices):
            cf = compact_form(block)
            rows = [cf.vectors[cf.labels.index(lab)] for lab in labels]
            rhos = tuple(DensityOperator(2, np.outer(v, v.conj())) for v in rows)
            return DiscriminationInstance(rhos, priors, Bipartition(2, QubitSubset.of([0])))
    rhos = tuple(DensityOperator.from_state(state_vector(states.basis, lab)) for lab in labels)
    return DiscriminationInstance(rhos, priors, cut)
