"""quadarena: deterministic batch-parallel multi-agent quadruped arena.

Velocity-commanded planar robots on composable terrain blocks, interactive
objects, scripted NPCs, twelve benchmark tasks and a vectorized Dec-POMDP
step API with throughput benchmarking.
"""

from .config import Config, ConfigError, DEFAULTS
from .core import BACKEND
from .tasks import TASK_IDS, build_task, layout_table, spaces
from .vecenv import EnvBatch, StepResult, bench, make

__version__ = "0.1.0"

__all__ = ["Config", "ConfigError", "DEFAULTS", "BACKEND", "TASK_IDS",
           "build_task", "layout_table", "spaces", "EnvBatch", "StepResult",
           "bench", "make", "__version__"]
