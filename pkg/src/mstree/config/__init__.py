from mstree.config.run import RunConfig
from mstree.config.settings import Settings

__all__ = ["RunConfig", "Settings"]
