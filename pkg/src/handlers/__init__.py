"""
Handlers package for Floquet Emitter.

Contains one task handler per domain and the router that dispatches to them.
"""

from .base import BaseTaskHandler
from .router import TaskRouter

__all__ = ['BaseTaskHandler', 'TaskRouter']
