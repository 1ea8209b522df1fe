"""Noise and density perturbations for building benchmark pairs.

Variants: gaussian (clipped additive noise), bernoulli (random point drop),
sampling (disjoint random subsets of a corresponding pair), zero_intersection
(a half/half split with no shared indices), subsample (fixed-count random
subset), none.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .geometry import PointCloud

GAUSSIAN = "gaussian"
BERNOULLI = "bernoulli"
SAMPLING = "sampling"
ZERO_INTERSECTION = "zero_intersection"
SUBSAMPLE = "subsample"
NONE = "none"

_VARIANTS = (GAUSSIAN, BERNOULLI, SAMPLING, ZERO_INTERSECTION, SUBSAMPLE, NONE)
_TARGETS = ("source", "target", "both")


@dataclass(frozen=True)
class NoiseSpec:
    variant: str = NONE
    sigma: float = 0.01
    clip: float = 0.05
    keep_prob: float = 0.7
    ratio: float = 0.5
    count: int = 1
    applied_to: str = "both"

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise InvalidArgumentError(f"unknown noise variant {self.variant!r}")
        if self.applied_to not in _TARGETS:
            raise InvalidArgumentError(f"applied_to must be one of {_TARGETS}")
        if self.sigma <= 0 or self.clip < 0:
            raise InvalidArgumentError("require sigma > 0 and clip >= 0")
        if not 0 < self.keep_prob <= 1:
            raise InvalidArgumentError("keep_prob must be in (0, 1]")
        if not 0 < self.ratio <= 1:
            raise InvalidArgumentError("ratio must be in (0, 1]")
        if self.count < 1:
            raise InvalidArgumentError("count must be >= 1")

    def serialize(self) -> str:
        """Compact text form, e.g. gaussian:sigma=0.01,clip=0.05."""
        params = {
            GAUSSIAN: [("sigma", self.sigma), ("clip", self.clip)],
            BERNOULLI: [("keep_prob", self.keep_prob)],
            SAMPLING: [("ratio", self.ratio)],
            SUBSAMPLE: [("count", self.count)],
            ZERO_INTERSECTION: [],
            NONE: [],
        }[self.variant]
        if self.variant in (GAUSSIAN, BERNOULLI, SUBSAMPLE) and self.applied_to != "both":
            params.append(("applied_to", self.applied_to))
        if not params:
            return self.variant
        return self.variant + ":" + ",".join(f"{k}={v}" for k, v in params)

    @classmethod
    def parse(cls, text: str) -> "NoiseSpec":
        text = text.strip()
        if ":" in text:
            variant, _, rest = text.partition(":")
            kwargs = {}
            for item in rest.split(","):
                if not item:
                    continue
                key, _, value = item.partition("=")
                if not _:
                    raise InvalidArgumentError(f"malformed noise parameter {item!r}")
                key = key.strip()
                value = value.strip()
                if key in ("sigma", "clip", "keep_prob", "ratio"):
                    kwargs[key] = float(value)
                elif key == "count":
                    kwargs[key] = int(value)
                elif key == "applied_to":
                    kwargs[key] = value
                else:
                    raise InvalidArgumentError(f"unknown noise parameter {key!r}")
            return cls(variant=variant.strip(), **kwargs)
        return cls(variant=text)


def _add_gaussian(pts, spec: NoiseSpec, rng: np.random.Generator):
    noise = np.clip(rng.normal(0.0, spec.sigma, size=pts.shape), -spec.clip, spec.clip)
    return pts + noise


def _bernoulli_mask(n: int, keep_prob: float, rng: np.random.Generator):
    while True:
        mask = rng.random(n) < keep_prob
        if mask.any():
            return mask


def corrupt(
    source: PointCloud,
    target: PointCloud,
    spec: NoiseSpec,
    rng: np.random.Generator,
) -> tuple[PointCloud, PointCloud]:
    """Apply spec to the pair; deterministic for a fixed generator state.

    Source-side draws always precede target-side draws so applied_to does not
    change the meaning of a seed for unrelated clouds.
    """
    s_pts, t_pts = source.points, target.points
    v = spec.variant
    on_source = spec.applied_to in ("source", "both")
    on_target = spec.applied_to in ("target", "both")

    if v == NONE:
        pass
    elif v == GAUSSIAN:
        if on_source:
            s_pts = _add_gaussian(s_pts, spec, rng)
        if on_target:
            t_pts = _add_gaussian(t_pts, spec, rng)
    elif v == BERNOULLI:
        if on_source:
            s_pts = s_pts[_bernoulli_mask(len(s_pts), spec.keep_prob, rng)]
        if on_target:
            t_pts = t_pts[_bernoulli_mask(len(t_pts), spec.keep_prob, rng)]
    elif v == SAMPLING:
        if len(s_pts) != len(t_pts):
            raise InvalidArgumentError("sampling noise needs equal-length clouds")
        n = len(s_pts)
        m = int(np.floor(spec.ratio * n))
        if m < 1 or 2 * m > n:
            raise InvalidArgumentError(
                "sampling ratio must leave room for two disjoint subsets"
            )
        perm = rng.permutation(n)
        s_pts = s_pts[np.sort(perm[:m])]
        t_pts = t_pts[np.sort(perm[m : 2 * m])]
    elif v == ZERO_INTERSECTION:
        if len(s_pts) != len(t_pts):
            raise InvalidArgumentError("zero_intersection needs equal-length clouds")
        n = len(s_pts)
        if n < 2:
            raise InvalidArgumentError("zero_intersection needs at least 2 points")
        perm = rng.permutation(n)
        half = n // 2
        s_pts = s_pts[np.sort(perm[:half])]
        t_pts = t_pts[np.sort(perm[half:])]
    elif v == SUBSAMPLE:
        if on_source:
            if spec.count > len(s_pts):
                raise InvalidArgumentError("subsample count exceeds source size")
            s_pts = s_pts[np.sort(rng.choice(len(s_pts), spec.count, replace=False))]
        if on_target:
            if spec.count > len(t_pts):
                raise InvalidArgumentError("subsample count exceeds target size")
            t_pts = t_pts[np.sort(rng.choice(len(t_pts), spec.count, replace=False))]

    return PointCloud(s_pts, source.id), PointCloud(t_pts, target.id)
