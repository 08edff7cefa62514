from .commands import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, CliConfig, Command, XSpacing, build_config, run
from .csv_output import CommandOutput, render, write_atomic

__all__ = [
    "EXIT_NUMERICAL",
    "EXIT_OK",
    "EXIT_USAGE",
    "CliConfig",
    "Command",
    "XSpacing",
    "build_config",
    "run",
    "CommandOutput",
    "render",
    "write_atomic",
]
