"""Deterministic seeded train/eval partitioning.

The split is 80/20 by default, with an optional cap that limits the eval set
to a fraction of the train set size. Augmented utterances (ids carrying the
"#aug-wn" suffix) always land on the same side as their originals so eval
never sees a near-duplicate of a training item.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .augment import AUGMENT_SUFFIX
from .corpus import CorpusManifest
from .rng import derive_seed, shuffle


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    eval_cap_fraction_of_train: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError(
                f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if not 0 < self.eval_cap_fraction_of_train <= 1:
            raise ValueError(
                "eval_cap_fraction_of_train must be in (0, 1], "
                f"got {self.eval_cap_fraction_of_train}")


@dataclass(frozen=True)
class SplitResult:
    train: CorpusManifest
    eval: CorpusManifest
    seed: int
    cap_applied: bool

    def report(self) -> dict:
        return {
            "seed": self.seed,
            "counts": {"train": len(self.train), "eval": len(self.eval)},
            "cap_applied": self.cap_applied,
        }


def base_id(utterance_id: str) -> str:
    if utterance_id.endswith(AUGMENT_SUFFIX):
        return utterance_id[: -len(AUGMENT_SUFFIX)]
    return utterance_id


def split(manifest: CorpusManifest, spec: SplitSpec) -> SplitResult:
    """Partition a manifest into train and eval manifests.

    Groups (an original plus any augmented variants) are shuffled by a seeded
    permutation; whole groups fill the train side until it reaches
    floor(n * train_fraction), the rest go to eval. Eval is then shuffled
    independently and truncated to ceil(|train| * cap).
    """
    if len(manifest) == 0:
        raise ValueError("cannot split an empty manifest")

    groups: dict[str, list] = {}
    order: list[str] = []
    for u in manifest:
        key = base_id(u.id)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(u)

    shuffled_keys = shuffle(order, spec.seed)
    n = len(manifest)
    # the 1e-9 nudges absorb float fuzz: 100 * 0.8 must floor to 80, and
    # 80 * 0.3 (= 24.000000000000004 in binary) must ceil to 24
    train_target = math.floor(n * spec.train_fraction + 1e-9)

    train: list = []
    eval_pool: list = []
    for key in shuffled_keys:
        side = train if len(train) < train_target else eval_pool
        side.extend(groups[key])

    eval_pool = shuffle(eval_pool, derive_seed(spec.seed, "eval"))
    cap = math.ceil(len(train) * spec.eval_cap_fraction_of_train - 1e-9)
    cap_applied = len(eval_pool) > cap
    if cap_applied:
        eval_pool = eval_pool[:cap]

    return SplitResult(
        train=CorpusManifest(f"{manifest.name}-train", tuple(train),
                             root=manifest.root),
        eval=CorpusManifest(f"{manifest.name}-eval", tuple(eval_pool),
                            root=manifest.root),
        seed=spec.seed,
        cap_applied=cap_applied,
    )
