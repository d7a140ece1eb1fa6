"""
Published integration-region rows for positive rho, kept as validation fixtures.

Each row is (symbol, received sequence, lower bounds, upper bounds) exactly as
printed, including rows whose bounds disagree with their sequence.
"""
from typing import Dict, List, Tuple

INF = float("inf")

RegionRow = Tuple[int, Tuple[int, ...], Tuple[float, ...], Tuple[float, ...]]

PRINTED_REGION_ROWS: Dict[int, List[RegionRow]] = {
    3: [
        (1, (1, 1, 1, 1), (0, 0, 0, 0), (INF, INF, INF, INF)),
        (1, (1, 1, -1, 1), (0, 0, -INF, 0), (INF, INF, 0, INF)),
        (1, (1, -1, 1, 1), (0, -INF, 0, 0), (INF, 0, INF, INF)),
        (2, (1, 1, 1, -1), (0, 0, 0, -INF), (INF, INF, INF, 0)),
        (2, (1, -1, 1, -1), (0, -INF, 0, -INF), (INF, 0, INF, 0)),
        (3, (1, 1, -1, -1), (0, 0, -INF, -INF), (INF, INF, 0, 0)),
        (4, (1, -1, -1, -1), (0, -INF, -INF, -INF), (INF, 0, 0, 0)),
        (4, (1, -1, -1, 1), (0, -INF, -INF, 0), (INF, 0, 0, INF)),
    ],
    2: [
        (1, (1, 1, 1, 1, 1), (0, 0, 0, 0, 0), (INF, INF, INF, INF, INF)),
        (1, (1, 1, 1, -1, 1), (0, 0, 0, -INF, 0), (INF, INF, INF, 0, INF)),
        (1, (1, 1, -1, 1, 1), (0, 0, -INF, 0, 0), (INF, INF, 0, INF, INF)),
        (1, (1, -1, 1, 1, 1), (0, -INF, 0, 0, 0), (INF, 0, INF, INF, INF)),
        (2, (1, 1, 1, 1, -1), (0, 0, 0, 0, -INF), (INF, INF, INF, INF, 0)),
        (2, (1, 1, -1, 1, -1), (0, 0, -INF, 0, -INF), (INF, INF, 0, INF, INF)),
        (2, (1, -1, 1, 1, -1), (0, -INF, 0, 0, -INF), (INF, 0, INF, INF, 0)),
        (3, (1, 1, 1, -1, -1), (0, 0, 0, -INF, -INF), (INF, INF, INF, 0, 0)),
        (3, (1, -1, 1, -1, -1), (0, -INF, 0, -INF, -INF), (INF, 0, INF, 0, 0)),
        (4, (1, 1, -1, -1, -1), (0, 0, -INF, -INF, -INF), (INF, INF, 0, 0, 0)),
        (5, (1, 1, -1, -1, 1), (0, 0, -INF, -INF, 0), (INF, INF, 0, 0, INF)),
        (6, (1, -1, -1, -1, 1), (0, -INF, -INF, -INF, 0), (INF, 0, 0, 0, INF)),
        (6, (1, -1, 1, -1, 1), (0, -INF, 0, -INF, 0), (INF, 0, INF, 0, INF)),
        (7, (1, -1, -1, -1, -1), (0, -INF, -INF, -INF, -INF), (INF, 0, 0, 0, 0)),
        (7, (1, -1, -1, 1, -1), (0, -INF, 0, -INF, 0), (INF, 0, INF, 0, INF)),
        (8, (1, -1, -1, 1, 1), (0, -INF, -INF, 0, 0), (INF, 0, 0, INF, INF)),
    ],
}


def printed_rows(m_rx: int) -> List[RegionRow]:
    return PRINTED_REGION_ROWS.get(m_rx, [])
