"""Scenario runner: schedules checks on a worker pool and writes the report files."""

import time
from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

from loguru import logger

from .checks import CheckContext, CheckResult, run_check, select_checks
from .config import ScenarioConfig
from .errors import WickCalcError
from .representation import export_operators
from .utils import atomic_write_text, dumps_report, ensure_directory, write_csv_table

REPORT_NAME = "report.json"


@dataclass(frozen=True)
class RunOutputs:
    """Results and files of one scenario run."""

    model: str
    results: list[CheckResult]
    report_path: Path
    table_paths: list[Path]

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    @property
    def failed(self) -> list[str]:
        return [result.id for result in self.results if not result.passed]


class ScenarioRunner:
    """Run the selected checks of one scenario."""

    def __init__(
        self,
        config: ScenarioConfig,
        output_directory: Path | None = None,
        jobs: int | None = None,
    ) -> None:
        self.config = config
        self.output_directory = Path(output_directory or config.output_directory)
        self.jobs = jobs or config.jobs
        self.logger = logger.bind(component="runner")

    @contextmanager
    def _stage(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        self.logger.debug(f"Stage {name}: begin")
        yield
        self.logger.debug(f"Stage {name}: end after {time.perf_counter() - start:.3f}s")

    def run(self, suite: str | None = None) -> RunOutputs:
        with self._stage("prepare"):
            context = CheckContext(self.config)
            check_ids = select_checks(
                context.model.name, suite or self.config.suite, self.config.checks
            )
        self.logger.info(
            f"Running {len(check_ids)} checks on {context.model.name} with {self.jobs} worker(s)"
        )

        with self._stage("checks"):
            # map keeps the submission order, so the report does not depend on scheduling.
            with ThreadPoolExecutor(max_workers=self.jobs) as pool:
                results = list(pool.map(lambda check_id: run_check(check_id, context), check_ids))

        with self._stage("persist"):
            ensure_directory(self.output_directory)
            table_paths = self._write_tables(results)
            if self.config.export_operators:
                table_paths.extend(self._export_operators(context))
            report_path = self.output_directory / REPORT_NAME
            payload = {
                "model": context.model.describe(),
                "checks": [result.model_dump() for result in results],
                "timing": {result.id: round(result.runtime_ms, 3) for result in results},
            }
            atomic_write_text(report_path, dumps_report(payload))

        outputs = RunOutputs(
            model=context.model.name,
            results=results,
            report_path=report_path,
            table_paths=table_paths,
        )
        self.logger.info(
            f"{len(results) - len(outputs.failed)}/{len(results)} checks passed; "
            f"report at {report_path}"
        )
        return outputs

    def _write_tables(self, results: list[CheckResult]) -> list[Path]:
        paths = []
        for result in results:
            for table in result.tables:
                stem = result.id if len(result.tables) == 1 else f"{result.id}-{table.name}"
                path = self.output_directory / f"{stem}.csv"
                write_csv_table(path, table.header, table.rows)
                paths.append(path)
        return paths

    def _export_operators(self, context: CheckContext) -> list[Path]:
        try:
            ops = context.operators()
        except WickCalcError as e:
            self.logger.warning(f"Operators not exported: {e}")
            return []
        return export_operators(ops, self.output_directory / "operators")


def run_scenario(
    config: ScenarioConfig,
    suite: str | None = None,
    output_directory: Path | None = None,
    jobs: int | None = None,
) -> RunOutputs:
    return ScenarioRunner(config, output_directory, jobs).run(suite)
