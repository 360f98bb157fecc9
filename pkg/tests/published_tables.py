"""Published per-cell values (rows: mean/var/trimmed CS, mean/var/trimmed ED) used as report fixtures."""

from ragocl.evaluation import AggregateStats
from ragocl.harness.sweep import SweepResult

KS = [10, 20, 30, 40, 50, 0]

TABLES = {
    "bm25": [
        [0.9231, 0.9208, 0.9292, 0.9212, 0.9133, 0.9338],
        [0.0028, 0.0023, 0.0021, 0.0042, 0.0064, 0.0022],
        [0.9366, 0.9321, 0.9403, 0.9364, 0.9348, 0.946],
        [5.434, 5.5972, 5.2179, 5.4504, 5.6474, 5.0682],
        [3.5722, 3.2460, 3.2735, 4.6489, 6.4171, 3.2026],
        [5.0244, 5.2199, 4.8489, 5.0026, 5.0397, 4.6396],
    ],
    "dense": [
        [0.9265, 0.9263, 0.9254, 0.9259, 0.9334, 0.9338],
        [0.0045, 0.0036, 0.0064, 0.0050, 0.0017, 0.0022],
        [0.9435, 0.9415, 0.9437, 0.9438, 0.9425, 0.946],
        [5.2026, 5.2436, 5.163, 5.2477, 5.0418, 5.0682],
        [4.8764, 4.3763, 6.2543, 5.1349, 3.2301, 3.2026],
        [4.6916, 4.7734, 4.6247, 4.7097, 4.7065, 4.6396],
    ],
    "sparse": [
        [0.9360, 0.9189, 0.9292, 0.9211, 0.9116, 0.9338],
        [0.0016, 0.0049, 0.0042, 0.0068, 0.0100, 0.0022],
        [0.9453, 0.9370, 0.9461, 0.9423, 0.9408, 0.946],
        [4.9842, 5.4851, 5.1187, 5.3317, 5.5794, 5.0682],
        [2.7181, 5.3273, 4.6761, 6.3177, 7.9934, 3.2026],
        [4.6473, 4.9433, 4.5949, 4.7300, 4.8053, 4.6396],
    ],
}

# bold cells in the published tables, as (row index, k)
BOLD = {
    "bm25": [(0, 30), (1, 30), (2, 30), (3, 30), (4, 20), (5, 30)],
    "dense": [(0, 50), (1, 50), (2, 40), (3, 50), (4, 50), (5, 30)],
    "sparse": [(0, 10), (1, 10), (2, 30), (3, 10), (4, 10), (5, 30)],
}


def published_result(retrievers=("bm25", "dense", "sparse")) -> SweepResult:
    cells = {}
    for r in retrievers:
        rows = TABLES[r]
        for j, k in enumerate(KS):
            cells[(r, k)] = AggregateStats(*(rows[i][j] for i in range(6)), n=72, trim_count=7)
    return SweepResult(cells, [], {})
