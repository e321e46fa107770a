"""
Floquet Emitter - Main orchestrator module.

This module coordinates the task handlers and the command-line surface:
- Run configs routed through handlers/router.py
- Artifacts and the manifest written by artifacts.py
- Every run recorded in the sqlite run registry
"""

import argparse
import logging
import time
from typing import List, Optional

from . import __version__
from .artifacts import ArtifactWriter, config_hash
from .config import dump_config, load_config
from .errors import EXIT_CONFIG, EXIT_OK, EXIT_UNEXPECTED, FloquetError
from .handlers import TaskRouter
from .logging_config import clear_run_id, get_logger, log_with_context, set_run_id
from .recipes import find_recipe, list_recipes
from .render import KINDS, render_svg
from .run_registry import RunRegistry

logger = get_logger(__name__)


class FloquetApp:
    """Main orchestrator - coordinates handlers, artifacts and the run registry"""

    def __init__(self, registry: Optional[RunRegistry] = None, workers: Optional[int] = None):
        """
        Initialize the application with its dependencies.

        Args:
            registry: run registry, created from FLOQUET_REGISTRY when omitted
            workers: default thread pool width for tasks
        """
        self.workers = workers
        self.registry = registry if registry is not None else RunRegistry()
        self.task_router = TaskRouter(self)

    def run(self, config_path: str, output_dir: Optional[str] = None) -> int:
        """
        Execute one run config.

        Returns:
            process exit code (0 ok, 2 config, 3 numerical, 1 unexpected)
        """
        try:
            cfg = load_config(config_path)
        except FloquetError as e:
            logger.error(f"Invalid config: {e}")
            return e.exit_code
        if output_dir:
            cfg.data['output_dir'] = output_dir

        normalized = cfg.normalized()
        digest = config_hash(normalized)
        run_id = digest[:12]
        set_run_id(run_id)
        writer = ArtifactWriter(cfg.output_dir)
        self.registry.start_run(run_id, cfg.task, digest, str(config_path), str(cfg.output_dir))
        started = time.perf_counter()

        status, code, error = 'ok', EXIT_OK, None
        try:
            summary = self.task_router.route(cfg, writer)
            writer.write_json('summary.json', summary)
            writer.write_text('config.yaml', dump_config(cfg))
        except FloquetError as e:
            status, code, error = 'failed', e.exit_code, str(e)
            logger.error(f"Run failed: {e}")
        except Exception as e:
            status, code, error = 'crashed', EXIT_UNEXPECTED, str(e)
            logger.exception(f"Unexpected error during run: {e}")
        finally:
            wall_time = time.perf_counter() - started
            try:
                writer.write_manifest(digest, cfg.task, cfg.seed, wall_time, status)
            except OSError as e:
                logger.error(f"Could not write manifest: {e}")
            self.registry.finish_run(run_id, status, code, wall_time, error)
            log_with_context(logger, logging.INFO, "Run complete", task=cfg.task,
                             status=status, wall_time_s=round(wall_time, 3))
            clear_run_id()
        return code

    def validate(self, config_path: str, show: bool = False) -> int:
        try:
            cfg = load_config(config_path)
        except FloquetError as e:
            print(f"invalid: {e}")
            return e.exit_code
        print(f"ok: task={cfg.task} output_dir={cfg.output_dir}")
        if show:
            print(dump_config(cfg), end='')
        return EXIT_OK

    def render(self, dataset: str, kind: str, output: Optional[str] = None, x: Optional[str] = None,
               y: Optional[List[str]] = None, z: Optional[str] = None,
               title: Optional[str] = None) -> int:
        try:
            path = render_svg(dataset, kind, output, x, y, z, title)
        except FloquetError as e:
            logger.error(f"Render failed: {e}")
            return e.exit_code
        print(path)
        return EXIT_OK

    def list_recipes(self) -> int:
        recipes = list_recipes()
        width = max((len(r.name) for r in recipes), default=0)
        for recipe in recipes:
            print(f"{recipe.name:<{width}}  {recipe.task:<12}  {recipe.description}")
        return EXIT_OK

    def run_recipe(self, name: str, output_dir: Optional[str] = None) -> int:
        try:
            path = find_recipe(name)
        except FloquetError as e:
            logger.error(str(e))
            return e.exit_code
        return self.run(str(path), output_dir)

    def list_runs(self, limit: int = 20, task: Optional[str] = None,
                  run_id: Optional[str] = None) -> int:
        if run_id:
            return self.show_run(run_id)
        for run in self.registry.recent_runs(limit, task):
            wall = f"{run['wall_time']:.2f}s" if run['wall_time'] is not None else '-'
            print(f"{run['run_id']}  {run['task']:<12}  {run['status']:<8}  {wall:>9}  "
                  f"{run['started_at']}  {run['output_dir']}")
        stats = self.registry.get_stats()
        if stats:
            counts = ', '.join(f"{n} {status}" for status, n in sorted(stats['by_status'].items()))
            print(f"total: {stats['total_runs']} runs ({counts})")
        return EXIT_OK

    def show_run(self, run_id: str) -> int:
        run = self.registry.get_run(run_id)
        if run is None:
            logger.error(f"No recorded run with id {run_id}")
            return EXIT_CONFIG
        for key, value in run.items():
            print(f"{key}: {value}")
        return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='floquet',
        description='Simulate and design frequency-modulated two-level emitters.'
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('--workers', type=int, default=None, help='thread pool width')
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', help='execute a run config')
    run.add_argument('config')
    run.add_argument('--output-dir', default=None, help='override output_dir')

    validate = sub.add_parser('validate', help='check a run config without running it')
    validate.add_argument('config')
    validate.add_argument('--show', action='store_true', help='print the normalized config')

    render = sub.add_parser('render', help='render a CSV dataset as SVG')
    render.add_argument('dataset')
    render.add_argument('--kind', choices=KINDS, required=True)
    render.add_argument('--output', default=None)
    render.add_argument('--x', default=None)
    render.add_argument('--y', nargs='+', default=None)
    render.add_argument('--z', default=None)
    render.add_argument('--title', default=None)

    recipes = sub.add_parser('recipes', help='shipped reproduction recipes')
    recipe_sub = recipes.add_subparsers(dest='recipe_command', required=True)
    recipe_sub.add_parser('list', help='list shipped recipes')
    recipe_run = recipe_sub.add_parser('run', help='run a recipe by name')
    recipe_run.add_argument('name')
    recipe_run.add_argument('--output-dir', default=None)

    runs = sub.add_parser('runs', help='list recorded runs')
    runs.add_argument('--limit', type=int, default=20)
    runs.add_argument('--task', default=None)
    runs.add_argument('--id', dest='run_id', default=None, help='show one run in full')
    return parser


def main(argv: Optional[List[str]] = None, app: Optional[FloquetApp] = None) -> int:
    """Parse arguments and dispatch; returns the process exit code"""
    args = build_parser().parse_args(argv)
    app = app or FloquetApp(workers=args.workers)

    if args.command == 'run':
        return app.run(args.config, args.output_dir)
    if args.command == 'validate':
        return app.validate(args.config, args.show)
    if args.command == 'render':
        return app.render(args.dataset, args.kind, args.output, args.x, args.y, args.z, args.title)
    if args.command == 'recipes':
        if args.recipe_command == 'list':
            return app.list_recipes()
        return app.run_recipe(args.name, args.output_dir)
    return app.list_runs(args.limit, args.task, args.run_id)
