from __future__ import annotations

from collections import defaultdict
from typing import Hashable, Sequence

import numpy as np

from boxcrit.boxcore import CriterionSpec
from boxcrit.evalkit.matching import score_order
from boxcrit.evalkit.types import Detection


def nms(dets: Sequence[Detection], criterion: CriterionSpec, threshold: float) -> list[Detection]:
    """Class-wise non-maximum suppression with any criterion.

    Walks each class by descending score and drops a detection when its
    criterion value with an already kept one reaches ``threshold``. Survivors
    are returned by descending score, ties in input order.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"NMS threshold must lie in (0, 1), got {threshold}")
    dets = list(dets)
    by_class: dict[Hashable, list[int]] = defaultdict(list)
    order = score_order(dets)
    for i in order:
        by_class[dets[i].class_id].append(i)

    keep: set[int] = set()
    for idx in by_class.values():
        matrix = criterion.pairwise([dets[i].box for i in idx], [dets[i].box for i in idx])
        suppressed = np.zeros(len(idx), dtype=bool)
        for a in range(len(idx)):
            if suppressed[a]:
                continue
            keep.add(idx[a])
            later = slice(a + 1, None)
            suppressed[later] |= matrix[a, later] >= threshold
    return [dets[i] for i in order if i in keep]
