import logging
import time
from typing import Any, Dict

from stablefluct import suites, toolhandler
from stablefluct.api.records import CheckResult, Summary, ToolDescription

logger = logging.getLogger("stablefluct")


class SuiteToolHandler(toolhandler.ToolHandler):
    """Runs one identity suite and summarises its cases."""

    def __init__(self, name: str, description: str, suite: suites.Suite):
        super().__init__(name)
        self._description = description
        self._suite = suite

    def get_tool_description(self) -> ToolDescription:
        return ToolDescription(
            name=self.name,
            description=self._description,
            inputSchema=self.get_input_schema([], optional=["tol"]),
        )

    def run_tool(self, args: Dict[str, Any]) -> CheckResult:
        params = self.get_params(args)
        started = time.perf_counter()
        logger.info(f"running suite {self.name} at d={params.d}, alpha={params.alpha}")
        cases = self._suite(params, args.get("tol"))
        failed = [case.name for case in cases if not case.passed]
        logger.info(
            f"suite {self.name}: {len(cases) - len(failed)} passed, {len(failed)} failed "
            f"in {time.perf_counter() - started:.2f}s"
        )
        for name in failed:
            logger.warning(f"case {name} failed")
        return CheckResult(
            suite=self.name,
            cases=cases,
            summary=Summary(passed=len(cases) - len(failed), failed=len(failed)),
        )


def get_check_handlers() -> list[SuiteToolHandler]:
    return [
        SuiteToolHandler(name, description, suite)
        for name, (suite, description) in suites.SUITES.items()
    ]
