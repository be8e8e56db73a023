"""Finite-difference verification of every analytic gradient.

Four suites compare analytic gradients against central finite differences
on random cases: standalone cosine similarity, cross-entropy, the
large-margin cosine loss, and the full model backward pass (main loss
plus a linearized regularizer term with a frozen upstream, since the rank
step itself is piecewise constant and has no finite-difference signal). A
fifth sweep checks the fast ranking routine against the brute-force
argmin-over-permutations oracle on small inputs. The report carries the
worst case of each suite in replayable form.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .exceptions import ValidationError
from .losses import LmclConfig, cross_entropy, lmcl
from .model import Activation, MlpConfig, backward, forward, init
from .numeric import cosine_similarity, cosine_similarity_grad, seeded_rng
from .ranking import TiePolicy, rank, rank_bruteforce
from .regularizer import OrdinalClassSet, _label_rank_matrix

FD_STEP = 1e-6
TOL_SCALAR = 1e-5
TOL_FULL_MODEL = 1e-4

SUITE_COSINE = "cosine"
SUITE_CE = "cross-entropy"
SUITE_LMCL = "lmcl"
SUITE_FULL_MODEL = "full-model"
SUITE_NAMES = (SUITE_COSINE, SUITE_CE, SUITE_LMCL, SUITE_FULL_MODEL)


@dataclass(frozen=True)
class GradCheckConfig:
    cases: int = 100
    rank_cases: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.cases < 1:
            raise ValidationError(f"cases must be >= 1, got {self.cases}")
        if self.rank_cases < 1:
            raise ValidationError(f"rank_cases must be >= 1, got {self.rank_cases}")


@dataclass
class SuiteResult:
    name: str
    n_cases: int
    max_rel_err: float
    tolerance: float
    passed: bool
    seconds: float
    worst_case: dict

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n_cases": self.n_cases,
            "max_rel_err": self.max_rel_err,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "seconds": self.seconds,
            "worst_case": self.worst_case,
        }


@dataclass
class RankSweepResult:
    n_cases: int
    n_mismatch: int
    passed: bool
    seconds: float
    worst_case: dict

    def to_dict(self) -> dict:
        return {
            "n_cases": self.n_cases,
            "n_mismatch": self.n_mismatch,
            "passed": self.passed,
            "seconds": self.seconds,
            "worst_case": self.worst_case,
        }


@dataclass
class GradCheckReport:
    suites: list[SuiteResult] = field(default_factory=list)
    rank_sweep: RankSweepResult | None = None

    @property
    def all_passed(self) -> bool:
        ok = all(s.passed for s in self.suites)
        return ok and (self.rank_sweep is None or self.rank_sweep.passed)

    def to_dict(self) -> dict:
        return {
            "suites": [s.to_dict() for s in self.suites],
            "rank_sweep": self.rank_sweep.to_dict() if self.rank_sweep else None,
            "all_passed": self.all_passed,
        }


def finite_difference(f, x: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """Central finite differences of a scalar function of a flat vector."""
    g = np.zeros_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2.0 * h)
    return g


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    na = float(np.linalg.norm(analytic))
    nn = float(np.linalg.norm(numeric))
    return float(np.linalg.norm(analytic - numeric)) / max(na, nn, 1e-12)


def _run_suite(name, tolerance, cases, corrupted) -> SuiteResult:
    start = time.perf_counter()
    max_err = 0.0
    worst: dict = {}
    for case_idx, (payload, analytic, numeric) in enumerate(cases):
        if corrupted and case_idx == 0:
            analytic = analytic + 1e-2
        err = relative_error(analytic, numeric)
        if err >= max_err:
            max_err = err
            worst = dict(payload)
            worst["analytic"] = analytic.tolist()
            worst["numeric"] = numeric.tolist()
            worst["rel_err"] = err
    return SuiteResult(
        name=name,
        n_cases=case_idx + 1,
        max_rel_err=max_err,
        tolerance=tolerance,
        passed=max_err <= tolerance,
        seconds=time.perf_counter() - start,
        worst_case=worst,
    )


def _random_vector(rng, dim, lo=0.5, hi=5.0) -> np.ndarray:
    v = rng.normal(size=dim)
    norm = np.linalg.norm(v)
    while norm < 1e-9:
        v = rng.normal(size=dim)
        norm = np.linalg.norm(v)
    return v * (rng.uniform(lo, hi) / norm)


def _cosine_cases(n_cases, rng):
    for _ in range(n_cases):
        dim = int(rng.integers(2, 9))
        u = _random_vector(rng, dim)
        v = _random_vector(rng, dim)
        gu, gv = cosine_similarity_grad(u, v)
        analytic = np.concatenate([gu, gv])

        def f(x, dim=dim):
            return cosine_similarity(x[:dim], x[dim:])

        numeric = finite_difference(f, np.concatenate([u, v]))
        yield {"u": u.tolist(), "v": v.tolist()}, analytic, numeric


def _ce_cases(n_cases, rng):
    for _ in range(n_cases):
        n = int(rng.integers(2, 9))
        logits = rng.normal(scale=2.0, size=n)
        target = int(rng.integers(n))
        _, analytic = cross_entropy(logits, target)

        def f(x, target=target):
            return cross_entropy(x, target)[0]

        numeric = finite_difference(f, logits)
        yield {"logits": logits.tolist(), "target": target}, analytic, numeric


def _lmcl_cases(n_cases, rng):
    for _ in range(n_cases):
        dim = int(rng.integers(2, 7))
        n_classes = int(rng.integers(2, 6))
        z = _random_vector(rng, dim)
        W = np.vstack([_random_vector(rng, dim) for _ in range(n_classes)])
        target = int(rng.integers(n_classes))
        cfg = LmclConfig(scale=float(rng.uniform(0.5, 3.0)),
                         margin=float(rng.uniform(0.0, 0.5)))
        _, gz, gW = lmcl(z, W, target, cfg)
        analytic = np.concatenate([gz, gW.ravel()])

        def f(x, dim=dim, shape=W.shape, target=target, cfg=cfg):
            return lmcl(x[:dim], x[dim:].reshape(shape), target, cfg)[0]

        numeric = finite_difference(f, np.concatenate([z, W.ravel()]))
        yield ({"features": z.tolist(), "head": W.tolist(), "target": target,
                "scale": cfg.scale, "margin": cfg.margin}, analytic, numeric)


def _random_model_config(rng) -> MlpConfig:
    depth = int(rng.integers(0, 3))
    hidden = tuple(int(rng.integers(2, 9)) for _ in range(depth))
    return MlpConfig(
        input_dim=int(rng.integers(2, 7)),
        hidden_dims=hidden,
        output_classes=int(rng.integers(2, 6)),
        activation=Activation.TANH if rng.integers(2) else Activation.RELU,
        init_seed=int(rng.integers(1 << 31)),
    )


def _flatten_params(model):
    return np.concatenate([a.ravel() for _, a in model.parameter_arrays()])


def _set_params(model, flat):
    offset = 0
    for _, a in model.parameter_arrays():
        a[...] = flat[offset:offset + a.size].reshape(a.shape)
        offset += a.size


def _full_model_cases(n_cases, rng, gamma=1.5, lam=2.0):
    """End-to-end cases: main loss plus a frozen-upstream cosine-chain term.

    The regularizer's rank step is piecewise constant, so the finite
    difference target uses its linearization: gamma * <frozen_G, S(W)>
    with frozen_G computed once from the unperturbed weights.
    """
    for case_idx in range(n_cases):
        mcfg = _random_model_config(rng)
        model = init(mcfg)
        # resample dead-relu inputs: zero-norm features have no cosine
        x = rng.normal(size=mcfg.input_dim)
        while np.linalg.norm(forward(model, x)[0]) <= 1e-3:
            x = rng.normal(size=mcfg.input_dim)
        target = int(rng.integers(mcfg.output_classes))
        use_lmcl = bool(case_idx % 2)
        lmcl_cfg = LmclConfig()
        classes = OrdinalClassSet.contiguous(mcfg.output_classes)
        targets_mat = _label_rank_matrix(classes.values, TiePolicy.COMPETITION)

        S0, _ = kernels.cosine_matrix_kernel(np.ascontiguousarray(model.head))
        _, frozen_G = kernels.rank_mse_grad_kernel(
            S0, targets_mat, lam, TiePolicy.COMPETITION.code)

        z, logits, cache = forward(model, x)
        if use_lmcl:
            main, gz, gW_main = lmcl(z, model.head, target, lmcl_cfg)
            grad_logits = np.zeros(mcfg.output_classes)
        else:
            main, grad_logits = cross_entropy(logits, target)
            gz, gW_main = None, np.zeros_like(model.head)
        W = np.ascontiguousarray(model.head)
        S, norms = kernels.cosine_matrix_kernel(W)
        gW_reg = kernels.cosine_chain_grad_kernel(W, S, norms, frozen_G)
        grads = backward(model, cache, grad_logits,
                         extra_grad_W=gW_main + gamma * gW_reg,
                         grad_z_extra=gz)
        analytic = np.concatenate([g.ravel() for g in grads.arrays()])

        probe = model.copy()

        def f(flat, probe=probe, x=x, target=target, use_lmcl=use_lmcl,
              lmcl_cfg=lmcl_cfg, frozen_G=frozen_G, gamma=gamma):
            _set_params(probe, flat)
            z, logits, _ = forward(probe, x)
            if use_lmcl:
                main = lmcl(z, probe.head, target, lmcl_cfg)[0]
            else:
                main = cross_entropy(logits, target)[0]
            S, _ = kernels.cosine_matrix_kernel(np.ascontiguousarray(probe.head))
            return main + gamma * float(np.sum(frozen_G * S))

        numeric = finite_difference(f, _flatten_params(model))
        yield ({"model_config": mcfg.to_dict(), "x": x.tolist(),
                "target": target, "loss": "lmcl" if use_lmcl else "ce"},
               analytic, numeric)


def rank_oracle_sweep(n_cases: int, rng,
                      corrupted: bool = False) -> RankSweepResult:
    """Fast rank vs. brute-force argmin over permutations, distinct entries."""
    start = time.perf_counter()
    n_mismatch = 0
    worst: dict = {}
    for case_idx in range(n_cases):
        n = int(rng.integers(2, 7))
        while True:
            a = rng.uniform(-10.0, 10.0, size=n)
            if np.unique(a).size == n:
                break
        fast = rank(a, TiePolicy.PERMUTATION)
        slow = rank_bruteforce(a)
        if corrupted and case_idx == 0:
            fast = fast[::-1].copy()
        if not np.array_equal(fast, slow):
            n_mismatch += 1
            if not worst:
                worst = {"a": a.tolist(), "fast": fast.tolist(),
                         "bruteforce": slow.tolist()}
    return RankSweepResult(
        n_cases=n_cases,
        n_mismatch=n_mismatch,
        passed=n_mismatch == 0,
        seconds=time.perf_counter() - start,
        worst_case=worst,
    )


def run_gradcheck(cfg: GradCheckConfig,
                  corrupt: str | None = None) -> GradCheckReport:
    """Run all suites plus the rank sweep; ``corrupt`` names a suite whose
    first case gets a deliberately wrong analytic gradient (test hook)."""
    if corrupt is not None and corrupt not in SUITE_NAMES + ("rank",):
        raise ValidationError(
            f"unknown corrupt target {corrupt!r}; allowed: "
            f"{', '.join(SUITE_NAMES + ('rank',))}"
        )
    rng = seeded_rng(cfg.seed)
    report = GradCheckReport()
    report.suites.append(_run_suite(
        SUITE_COSINE, TOL_SCALAR, _cosine_cases(cfg.cases, rng),
        corrupt == SUITE_COSINE))
    report.suites.append(_run_suite(
        SUITE_CE, TOL_SCALAR, _ce_cases(cfg.cases, rng),
        corrupt == SUITE_CE))
    report.suites.append(_run_suite(
        SUITE_LMCL, TOL_SCALAR, _lmcl_cases(cfg.cases, rng),
        corrupt == SUITE_LMCL))
    report.suites.append(_run_suite(
        SUITE_FULL_MODEL, TOL_FULL_MODEL, _full_model_cases(cfg.cases, rng),
        corrupt == SUITE_FULL_MODEL))
    report.rank_sweep = rank_oracle_sweep(cfg.rank_cases, rng,
                                          corrupted=corrupt == "rank")
    return report
