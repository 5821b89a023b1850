# analysis/sweep.py

"""Batch evaluation: the C0(omega) curve and two-dimensional stability maps."""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Tuple

from analysis.equilibrium import compute_equilibrium
from analysis.errors import InvalidParameterError, NoEquilibriumError
from analysis.stability import assess_stability, thresholds_at
from config import SolverConfig, get_thread_count
from models.schemas import GridParams
from models.sweep import CellVerdict, CurveRow, MapCell, StabilityMap, SweepGrid
from utils.number_utils import NumberUtils

logger = logging.getLogger(__name__)

CURVE_COLUMNS = ['omega', 'c2', 'c1', 'c0_minus', 'c0', 'c_base']


class SweepRunner:
    """Evaluate independent grid points, optionally on a thread pool."""

    def __init__(self, threads: Optional[int] = None, marginal_band: Optional[float] = None):
        """
        Initialize sweep runner.

        Args:
            threads: Worker threads (default from VI_STAB_THREADS, 0 = one per CPU)
            marginal_band: Relative band around thresholds reported as marginal
        """
        self.threads = get_thread_count() if threads is None else max(1, threads)
        self.marginal_band = SolverConfig.MARGINAL_BAND if marginal_band is None else marginal_band

    def _map(self, fn: Callable, items: Iterable) -> List:
        items = list(items)
        if self.threads == 1 or len(items) < 2:
            return [fn(item) for item in items]
        # Executor.map yields in submission order, so output stays row-major.
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(fn, items))

    def curve_c0_vs_omega(self, grid: SweepGrid) -> List[CurveRow]:
        """
        Capacitance thresholds over a bandwidth axis, with the constant C_base line.

        Args:
            grid: One-dimensional grid over omega; fixed params and power

        Returns:
            List of CurveRow, one per bandwidth

        Raises:
            NoEquilibriumError: the fixed power exceeds P_max
        """
        if grid.axis1.name != 'omega' or grid.axis2 is not None:
            raise InvalidParameterError("The C0 curve needs a single omega axis")
        p = grid.fixed
        eq = compute_equilibrium(p, grid.power)
        if not eq.is_loaded:
            raise InvalidParameterError("The C0 curve needs P > 0")
        c_base = p.inductance / (p.droop_gain * eq.r_effective)

        def row(omega: float) -> CurveRow:
            th = thresholds_at(omega, p.inductance, p.droop_gain, eq.r_effective)
            return CurveRow(omega=omega, c2=th.c2, c1=th.c1, c0_minus=th.c0_minus,
                            c0=th.c0, c_base=c_base)

        rows = self._map(row, grid.axis1.values())
        logger.info("C0 curve: %d bandwidths evaluated", len(rows))
        return rows

    def _point(self, grid: SweepGrid, x: float, y: float) -> Tuple[GridParams, float]:
        values = {grid.axis1.name: x, grid.axis2.name: y}
        power = values.pop('power', grid.power)
        updates = {}
        if 'omega' in values:
            updates['lpf_bandwidth'] = values['omega']
        if 'capacitance' in values:
            updates['capacitance'] = values['capacitance']
        return grid.fixed.with_updates(**updates), power

    def evaluate_cell(self, grid: SweepGrid, x: float, y: float,
                      cross_check: bool = False) -> MapCell:
        """
        Classify one operating point of a two-dimensional grid.

        Args:
            grid: Two-dimensional grid
            x: axis1 value
            y: axis2 value
            cross_check: Also evaluate the eigenvalue oracle

        Returns:
            MapCell
        """
        params, power = self._point(grid, x, y)
        try:
            eq = compute_equilibrium(params, power)
        except NoEquilibriumError:
            return MapCell(x=x, y=y, verdict=CellVerdict.NO_EQUILIBRIUM)

        c = params.require_capacitance()
        verdict = CellVerdict.STABLE
        if eq.is_loaded:
            th = thresholds_at(params.lpf_bandwidth, params.inductance,
                               params.droop_gain, eq.r_effective)
            near = any(NumberUtils.within_band(c, ref, self.marginal_band)
                       for ref in th.as_list() if ref != 0.0)
            at_limit = eq.r_effective - params.droop_gain <= self.marginal_band * params.droop_gain
            if near or at_limit:
                verdict = CellVerdict.MARGINAL
            elif c <= th.c0:
                verdict = CellVerdict.UNSTABLE

        oracle = None
        if cross_check:
            report = assess_stability(params, eq)
            oracle = max(e.re for e in report.eigs) < 0.0
        return MapCell(x=x, y=y, verdict=verdict, oracle_stable=oracle)

    def stability_map(self, grid: SweepGrid, cross_check: bool = False) -> StabilityMap:
        """
        Raster of verdicts over two axes, row-major with axis1 outermost.

        Args:
            grid: Two-dimensional grid
            cross_check: Attach the eigenvalue-sign verdict to every cell

        Returns:
            StabilityMap
        """
        if grid.axis2 is None:
            raise InvalidParameterError("A stability map needs two axes")
        points = [(x, y) for x in grid.axis1.values() for y in grid.axis2.values()]
        if 'capacitance' not in (grid.axis1.name, grid.axis2.name):
            grid.fixed.require_capacitance()

        cells = self._map(lambda xy: self.evaluate_cell(grid, xy[0], xy[1], cross_check), points)
        if cross_check:
            disagreements = sum(1 for cell in cells if cell.oracle_agrees is False)
            if disagreements:
                logger.warning("Eigenvalue oracle disagrees on %d cells", disagreements)
        logger.info("Stability map: %d cells evaluated", len(cells))
        return StabilityMap(axis1=grid.axis1, axis2=grid.axis2, cells=cells)


def boundary_index(column: List[CellVerdict]) -> Optional[int]:
    """First index from which every cell is stable, or None when none is."""
    for idx in range(len(column)):
        if all(v == CellVerdict.STABLE for v in column[idx:]):
            return idx
    return None


def curve_minimum(rows: List[CurveRow]) -> CurveRow:
    """Row with the smallest C0."""
    return min(rows, key=lambda r: r.c0 if math.isfinite(r.c0) else math.inf)
