"""Hard instances for locking LPT and seeded random instances.

Random instances use numpy's PCG64 bit generator (``numpy.random.default_rng``),
whose stream is fixed across platforms for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InvalidArgument, Instance, Job

DEFAULT_EPS = 1e-6


def gen_one_one_two(m: int, eps: float = DEFAULT_EPS) -> Instance:
    """Two unit jobs at time 0, then ``m - 1`` jobs of size 2 just after."""
    if m < 2:
        raise InvalidArgument(f"one-one-two needs m >= 2, got {m}")
    if not eps > 0:
        raise InvalidArgument(f"eps must be positive, got {eps}")
    return Instance.from_pairs(m, [(0.0, 1.0)] * 2 + [(eps, 2.0)] * (m - 1))


def gen_case1(m: int) -> Instance:
    if m < 2:
        raise InvalidArgument(f"case 1 needs m >= 2, got {m}")
    return Instance.from_pairs(m, [(0.0, 1.0)] * m)


def case2_sizes(alpha: float) -> tuple[float, float, float]:
    """``(p1, r7 - eps, p7)`` of the second hard family."""
    q = (1 - alpha) ** 5
    p1 = 1 / (1 + q)
    head = (1 - q) * p1
    return p1, head, 1 - head


def gen_case2(m: int, alpha: float, eps: float = DEFAULT_EPS) -> Instance:
    """Six geometrically shrinking jobs at 0, then ``m - 3`` equal jobs released as the sixth starts.

    Jobs are numbered 1..6 and 7..m+3.
    """
    if m < 6:
        raise InvalidArgument(f"case 2 needs m >= 6, got {m}")
    # The boundary 1/(2(m-1)) is allowed: it is the point where the static lock is weakest.
    if not 0 < alpha <= 1 / (2 * (m - 1)):
        raise InvalidArgument(f"alpha must lie in (0, 1/(2(m-1))] = (0, {1 / (2 * (m - 1))}], got {alpha}")
    if not eps > 0:
        raise InvalidArgument(f"eps must be positive, got {eps}")
    p1, head, p7 = case2_sizes(alpha)
    early = [(0.0, (1 - alpha) ** i * p1) for i in range(6)]
    late = [(head + eps, p7)] * (m - 3)
    return Instance.from_pairs(m, early + late)


def f_case2(alpha: float) -> float:
    """Limit makespan of the static policy on the second hard family (optimum 1)."""
    q = (1 - alpha) ** 5
    return 1 / (1 + q) + (1 + 2 * alpha) * (1 - (1 - q) / (1 + q))


@dataclass(frozen=True)
class RandomSpec:
    """Parameters of a seeded random instance.

    ``proc_distribution`` is one of
    ``("uniform", lo, hi)``, ``("geometric", ratio, levels)`` (sizes ``ratio ** k``
    with ``k`` uniform in ``0..levels-1``) or ``("two-class", small, large, fraction)``.
    ``release_grid`` snaps releases down to multiples of the grid to create ties.
    """

    seed: int
    n: int
    m: int
    release_span: float = 1.0
    proc_distribution: tuple = ("uniform", 0.1, 1.0)
    release_grid: float | None = None

    def validate(self) -> None:
        if self.n < 1:
            raise InvalidArgument(f"n must be >= 1, got {self.n}")
        if self.m < 1:
            raise InvalidArgument(f"m must be >= 1, got {self.m}")
        if self.release_span < 0:
            raise InvalidArgument("release span must be non-negative")
        if self.release_grid is not None and not self.release_grid > 0:
            raise InvalidArgument("release grid must be positive")
        kind, *args = self.proc_distribution
        if kind == "uniform":
            lo, hi = args
            if not 0 < lo <= hi:
                raise InvalidArgument(f"uniform sizes need 0 < lo <= hi, got {lo}, {hi}")
        elif kind == "geometric":
            ratio, levels = args
            if not ratio > 0 or int(levels) < 1:
                raise InvalidArgument(f"geometric sizes need ratio > 0 and levels >= 1, got {ratio}, {levels}")
        elif kind == "two-class":
            small, large, frac = args
            if not 0 < small <= large or not 0 <= frac <= 1:
                raise InvalidArgument(f"two-class sizes need 0 < small <= large, fraction in [0,1]")
        else:
            raise InvalidArgument(f"unknown size distribution {kind!r}")


def gen_random(spec: RandomSpec) -> Instance:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    releases = rng.uniform(0.0, spec.release_span, spec.n) if spec.release_span > 0 else np.zeros(spec.n)
    if spec.release_grid is not None:
        releases = np.floor(releases / spec.release_grid) * spec.release_grid
    kind, *args = spec.proc_distribution
    if kind == "uniform":
        procs = rng.uniform(args[0], args[1], spec.n)
    elif kind == "geometric":
        procs = float(args[0]) ** rng.integers(0, int(args[1]), spec.n)
    else:
        small, large, frac = args
        procs = np.where(rng.random(spec.n) < frac, large, small)
    return Instance(spec.m, [Job(i + 1, float(r), float(p)) for i, (r, p) in enumerate(zip(releases, procs))])


def perturb(inst: Instance, eps: float, rng: np.random.Generator) -> Instance:
    """Jitter every release by at most ``eps`` (kept non-negative)."""
    jitter = rng.uniform(-eps, eps, inst.n)
    return Instance(inst.m, [Job(j.id, max(0.0, j.release + float(d)), j.proc) for j, d in zip(inst.jobs, jitter)])
