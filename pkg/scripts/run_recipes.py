#!/usr/bin/env python3
"""
Recipe Batch Runner for Floquet Emitter

Runs every shipped recipe (or the ones named on the command line) through the
same orchestrator the CLI uses and prints a summary table.
"""

import sys
import time
from pathlib import Path
from typing import List, Optional, Tuple

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from dotenv import load_dotenv

from src.app import FloquetApp
from src.logging_config import get_logger, setup_logging
from src.recipes import Recipe, list_recipes

logger = get_logger(__name__)


class RecipeRunner:
    def __init__(self, output_root: Optional[str] = None):
        self.app = FloquetApp()
        self.output_root = Path(output_root) if output_root else None
        self.results: List[Tuple[Recipe, int, float]] = []

    def run(self, names: List[str]) -> bool:
        """Run the selected recipes; True when all of them exit cleanly"""
        recipes = list_recipes()
        if names:
            unknown = set(names) - {r.name for r in recipes}
            if unknown:
                logger.error(f"Unknown recipes: {', '.join(sorted(unknown))}")
                return False
            recipes = [r for r in recipes if r.name in names]

        for recipe in recipes:
            logger.info(f"Running recipe {recipe.name} ({recipe.task})")
            output_dir = str(self.output_root / recipe.name) if self.output_root else None
            started = time.perf_counter()
            code = self.app.run(str(recipe.path), output_dir)
            self.results.append((recipe, code, time.perf_counter() - started))
        return all(code == 0 for _, code, _ in self.results)

    def print_summary(self):
        print("\n" + "=" * 60)
        print("RECIPE SUMMARY")
        print("=" * 60)
        for recipe, code, elapsed in self.results:
            mark = "ok" if code == 0 else f"exit {code}"
            print(f"{recipe.name:<32} {recipe.task:<12} {elapsed:>8.1f}s  {mark}")
        failed = sum(1 for _, code, _ in self.results if code != 0)
        print(f"\nTotal: {len(self.results)}  failed: {failed}")
        print("=" * 60)


def main():
    """Main function"""
    load_dotenv()
    setup_logging()

    args = sys.argv[1:]
    output_root = None
    if args[:1] == ['--output-root']:
        if len(args) < 2:
            print("Usage: python scripts/run_recipes.py [--output-root DIR] [recipe ...]")
            sys.exit(2)
        output_root, args = args[1], args[2:]

    runner = RecipeRunner(output_root)
    success = runner.run(args)
    runner.print_summary()
    sys.exit(0 if success else 1)


if __name__ == '__main__':
    main()
