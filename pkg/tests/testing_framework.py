import time
import traceback
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

'''
Category runner for the simulator's test modules.

Each test module exposes one aggregate function (test_engine, test_batching, ...)
that calls its sub-tests in order. run_suite.py registers those aggregates:

    framework = TestingFramework()
    framework.register_test_case("batching", test_batching, "Dynamic batcher")
    framework.run_tests()                      # or run_tests("batching")
    all_passed = framework.summarize_results()

The same functions are collected by pytest directly; the runner adds per-category
timing for the oracle and end-to-end checks, which have runtime limits.
'''

# Category -> what its tests exercise
DEFAULT_CATEGORIES = {
    "engine": "Event loop, cancellation and resources",
    "workload": "Arrivals and input lengths",
    "preproc": "CPU pool and DPU models",
    "tuning": "Profiles, knees and policies",
    "batching": "Dynamic batcher and its replay oracle",
    "server": "vGPU execution and saturated feed",
    "metrics": "Percentiles, reports and cost",
    "integration": "Scenarios, sweeps and the command line",
}


@dataclass
class TestOutcome:
    status: str
    description: str
    seconds: float
    error: Optional[str] = None


class TestingFramework:
    """
    Registers test functions under categories, runs them and prints a colored summary.

    A test passes when it returns; an AssertionError marks it FAILED and any
    other exception marks it ERROR (with the traceback).
    """

    def __init__(self, test_categories: Optional[Dict[str, list]] = None):
        """
        Args:
            test_categories (Dict[str, list]): Category name -> registered tests.
                                               None starts from DEFAULT_CATEGORIES, all empty.
        """
        if test_categories is None:
            test_categories = {name: [] for name in DEFAULT_CATEGORIES}
        self.test_categories = test_categories
        self.results: Dict[str, List[TestOutcome]] = {}

    def register_test_case(self, category: str, test_func: Callable, description: str = ""):
        """
        Raises:
            ValueError: If the category is not known to this framework
        """
        self._check_category(category)
        self.test_categories[category].append({"func": test_func,
                                               "description": description or DEFAULT_CATEGORIES.get(category, "")})

    def run_tests(self, category: Optional[str] = None):
        """Run one category, or every category in registration order."""
        if category:
            self._check_category(category)
            self.__run_tests_category(category)
        else:
            for name in self.test_categories:
                self.__run_tests_category(name)

    def summarize_results(self) -> bool:
        """Print passed/total and wall time per category; returns True when nothing failed."""
        print("\n\033[95m" + "=" * 80)
        print(f"{'Test Summary':^80}")
        print("=" * 80 + "\033[0m")

        for category, outcomes in self.results.items():
            if outcomes:
                self.__summarize_results_category(category)
        failures = [(c, o) for c, outcomes in self.results.items() for o in outcomes if o.status != "PASSED"]
        if failures:
            print("\033[91mNot passing:")
            for category, outcome in failures:
                print(f"  {outcome.status:<7} [{category}] {outcome.description}")
            print("\033[0m")
        return not failures

    ## Private Methods -----------------------------------------------------------------------------------------

    def _check_category(self, category: str) -> None:
        if category not in self.test_categories:
            raise ValueError(f"Unknown category '{category}'. Available categories: {list(self.test_categories)}")

    def __run_tests_category(self, category: str):
        tests = self.test_categories[category]
        self.results[category] = []

        print("\n\033[95m" + "=" * 80)
        print(f"Running tests for category: {category}")
        print("-" * 80 + "\033[0m\n")

        for idx, test in enumerate(tests):
            test_num = f"[{idx + 1:02d}/{len(tests):02d}]"
            description = test["description"]
            print(f"\033[94m{test_num:<10} Running:  {description}\033[0m")
            start = time.perf_counter()
            try:
                test["func"]()
            except AssertionError as e:
                outcome = TestOutcome("FAILED", description, time.perf_counter() - start, str(e))
                print(f"\033[91m{test_num:<10} FAILED:   {description}")
                print(f"{' ' * 10} Error:    {e}\033[0m\n")
            except Exception as e:
                outcome = TestOutcome("ERROR", description, time.perf_counter() - start, str(e))
                print(f"\033[91m{test_num:<10} ERROR:    {description}")
                print(f"{' ' * 10} Error:    {e}")
                print(f"{' ' * 10} Traceback: {traceback.format_exc()}\033[0m\n")
            else:
                outcome = TestOutcome("PASSED", description, time.perf_counter() - start)
                print(f"\033[92m{test_num:<10} PASSED:   {description} ({outcome.seconds:.1f}s)\033[0m\n")
            self.results[category].append(outcome)

    def __summarize_results_category(self, category: str):
        outcomes = self.results[category]
        passed = sum(1 for o in outcomes if o.status == "PASSED")
        total = len(outcomes)
        seconds = sum(o.seconds for o in outcomes)

        print(f"\033[93m{'Category:':<12} {category:<30}")
        print(f"{'Results:':<12} {passed}/{total} tests passed ({passed / total * 100:.1f}%) in {seconds:.1f}s\033[0m")
