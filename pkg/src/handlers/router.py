"""
Task routing for Floquet Emitter.

Central router that dispatches a validated run config to the handler of its task.
"""

import logging
from typing import Any, Dict

from ..artifacts import ArtifactWriter
from ..config import RunConfig
from ..errors import ConfigError, FloquetError
from ..logging_config import get_logger, log_with_context
from .correlation_tasks import CorrelationTaskHandler
from .dynamics_tasks import DynamicsTaskHandler
from .optimizer_tasks import OptimizerTaskHandler
from .pulsed_tasks import PulsedTaskHandler
from .ramsey_tasks import RamseyTaskHandler
from .scattering_tasks import ScatteringTaskHandler

logger = get_logger(__name__)


class TaskRouter:
    """Routes run configs to the appropriate domain handlers"""

    def __init__(self, app_instance):
        """
        Initialize task router with all domain handlers.

        Args:
            app_instance: Reference to the main FloquetApp instance
        """
        self.app = app_instance
        workers = app_instance.workers

        # Initialize domain handlers
        self.scattering_handler = ScatteringTaskHandler(workers)
        self.correlation_handler = CorrelationTaskHandler(workers)
        self.dynamics_handler = DynamicsTaskHandler(workers)
        self.optimizer_handler = OptimizerTaskHandler(workers)
        self.pulsed_handler = PulsedTaskHandler(workers)
        self.ramsey_handler = RamseyTaskHandler(workers)

        self.exact_handlers = {
            'spectrum': self.scattering_handler.handle_spectrum,
            'transmission': self.scattering_handler.handle_transmission,
            'map': self.scattering_handler.handle_map,
            'g2': self.correlation_handler.handle_g2,
            'trajectory': self.dynamics_handler.handle_trajectory,
            'optimize': self.optimizer_handler.handle_optimize,
            'pulsed': self.pulsed_handler.handle_pulsed,
            'ramsey': self.ramsey_handler.handle_ramsey,
        }

    def route(self, cfg: RunConfig, writer: ArtifactWriter) -> Dict[str, Any]:
        """
        Run the task named by the config.

        Returns:
            JSON-ready summary of the task

        Raises:
            FloquetError: with the task name attached
        """
        handler = self.exact_handlers.get(cfg.task)
        if handler is None:
            raise ConfigError(f"unknown task '{cfg.task}'", cfg.path, cfg.lines.get('task'), 'task')

        log_with_context(logger, logging.INFO, "Task started", task=cfg.task,
                         output_dir=str(writer.output_dir))
        try:
            summary = handler(cfg, writer)
        except FloquetError as e:
            log_with_context(logger, logging.ERROR, f"Task failed: {e.message}", task=cfg.task,
                             error=type(e).__name__,
                             context={k: str(v) for k, v in e.context.items()})
            raise e.with_task(cfg.task)
        log_with_context(logger, logging.INFO, "Task finished", task=cfg.task,
                         artifacts=len(writer.written))
        return summary
