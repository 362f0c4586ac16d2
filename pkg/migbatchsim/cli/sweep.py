import itertools
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import pandas as pd
from tqdm import tqdm

from ..server.saturated import run_saturated_feed
from ..utils.logging import get_logger
from ..workload.request import IMAGE_INPUT_LENGTH
from .config import ScenarioConfig, SweepSpec
from .runner import Simulation, load_model_profile

logger = get_logger(__name__)

RESULT_COLUMNS = ["qps", "p50_us", "p95_us", "p99_us", "vgpu_util", "preproc_util", "mean_batch_size"]


def sweep_grid(spec: SweepSpec) -> List[Dict[str, Any]]:
    """Grid points in declared axis order (the last axis varies fastest)."""
    names = [axis.name for axis in spec.axes]
    return [dict(zip(names, values)) for values in itertools.product(*(axis.values for axis in spec.axes))]


def _feed_length(config: ScenarioConfig, profile) -> float:
    source = config.traffic.input
    if source.kind == "audio_constant":
        return source.length_s
    if source.kind == "audio":
        return profile.max_length
    return IMAGE_INPUT_LENGTH


def run_point(config: ScenarioConfig, point: Dict[str, Any]) -> Dict[str, Any]:
    """Simulate one grid point and return its CSV row."""
    logger.debug(f"sweep point {point} started")
    if "batch_size" in point:
        profile = load_model_profile(config)
        report = run_saturated_feed(profile, config.mig.to_mig_config().vgpu_count, int(point["batch_size"]),
                                    _feed_length(config, profile), config.sim.duration_us,
                                    config.sim.warmup_fraction)
    else:
        report = Simulation(config).run()
    row = dict(point)
    row.update({
        "qps": report.qps,
        "p50_us": report.p50_us,
        "p95_us": report.p95_us,
        "p99_us": report.p99_us,
        "vgpu_util": report.utilization.get("vgpu", 0.0),
        "preproc_util": report.utilization.get("preproc", 0.0),
        "mean_batch_size": report.mean_batch_size,
    })
    logger.debug(f"sweep point {point} finished: qps={report.qps:.1f}")
    return row


def _run_job(job: Tuple[ScenarioConfig, Dict[str, Any]]) -> Dict[str, Any]:
    return run_point(*job)


def run_sweep(spec: SweepSpec, parallel: Optional[int] = None,
              progress: bool = True) -> Tuple[pd.DataFrame, Optional[BaseException]]:
    """
    Run every grid point; rows stay in grid order whatever the parallelism.

    Returns:
        (frame, error): frame has a `complete` column that is False on every
        row when a point failed; error is that failure (None on success)
    """
    points = sweep_grid(spec)
    jobs = [(spec.apply(point), point) for point in points]
    workers = parallel or spec.parallel
    rows: List[Dict[str, Any]] = []
    error: Optional[BaseException] = None
    bar = tqdm(total=len(jobs), desc="sweep", disable=not progress)
    try:
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for row in pool.map(_run_job, jobs):
                    rows.append(row)
                    bar.update(1)
        else:
            for job in jobs:
                rows.append(_run_job(job))
                bar.update(1)
    except Exception as e:
        error = e
        logger.error(f"sweep stopped after {len(rows)}/{len(jobs)} points: {e}")
    finally:
        bar.close()

    columns = [axis.name for axis in spec.axes] + RESULT_COLUMNS
    frame = pd.DataFrame(rows, columns=columns)
    frame["complete"] = error is None
    return frame, error


def write_sweep_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path
