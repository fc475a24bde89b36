"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import logging
import logging.handlers
import os
import sys
import traceback
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from pathlib import Path

from lgcore.errors import ConfigError, LevyLabError

from .cli import parse_args
from .config import load_config
from .manifest import RunDirectory, RunManifest
from .run_manager import run

EXIT_PASSED = 0
EXIT_GATES_FAILED = 1
EXIT_ERROR = 2

LAB_LOG_DIR = '.levylab'
LAB_LOG_NAME = 'levylab.log'
DEV_ENV = 'LEVYLAB_DEV'
LOG_FORMAT = '%(asctime)s %(levelname)s [%(processName)s] %(name)s: %(message)s'
DATE_FORMAT = '%Y-%m-%dT%H:%M:%S'

logger = logging.getLogger(__name__)


def _dev_mode() -> bool:
    return os.environ.get(DEV_ENV, '').strip().lower() in ('1', 'true', 'yes')


def _lab_handler(handler: logging.Handler) -> logging.Handler:
    handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
    handler.levylab = True
    return handler


def setup_logging() -> Path:
    """Stderr plus the rotating lab log ~/.levylab/levylab.log shared by every run.

    Returns the lab log path. LEVYLAB_DEV lowers the level to DEBUG.
    """
    log_file = Path.home() / LAB_LOG_DIR / LAB_LOG_NAME
    log_file.parent.mkdir(parents=True, exist_ok=True)

    root = logging.getLogger()
    root.setLevel(logging.DEBUG if _dev_mode() else logging.INFO)
    # main() may run several times in one process
    for handler in [h for h in root.handlers if getattr(h, 'levylab', False)]:
        root.removeHandler(handler)
        handler.close()

    root.addHandler(_lab_handler(logging.StreamHandler(sys.stderr)))
    root.addHandler(_lab_handler(logging.handlers.RotatingFileHandler(
        log_file, maxBytes=5 * 1024 * 1024, backupCount=3, encoding='utf-8')))
    return log_file


@contextmanager
def run_log(directory: RunDirectory) -> Iterator[Path]:
    """Copy every record of one command into `<output root>/<run name>.log`.

    The file sits beside the run directory, so reruns keep the directory itself byte-identical.
    """
    path = directory.path.parent / f"{directory.manifest.run_name}.log"
    path.parent.mkdir(parents=True, exist_ok=True)
    handler = _lab_handler(logging.FileHandler(path, encoding='utf-8'))
    root = logging.getLogger()
    root.addHandler(handler)
    try:
        yield path
    finally:
        root.removeHandler(handler)
        handler.close()


def crash_hook(command: str) -> Callable:
    """sys.excepthook for one command: the traceback plus the innermost lgcore/lgrunner frame."""

    def hook(exc_type, exc_value, exc_traceback):
        if issubclass(exc_type, KeyboardInterrupt):
            logger.warning("levylab %s interrupted", command)
            sys.__excepthook__(exc_type, exc_value, exc_traceback)
            return
        logger.critical("levylab %s crashed: %s: %s", command, exc_type.__name__, exc_value,
                        exc_info=(exc_type, exc_value, exc_traceback))
        frames = [f for f in traceback.extract_tb(exc_traceback)
                  if any(part in ('lgcore', 'lgrunner') for part in Path(f.filename).parts)]
        if frames:
            last = frames[-1]
            logger.critical("Innermost lab frame: %s at %s:%d", last.name, Path(last.filename).name, last.lineno)

    return hook


def main(argv: list[str] | None = None) -> int:
    """Entry point of `levylab`: 0 when every executed gate passes, 1 on gate failures, 2 on errors."""
    args = parse_args(argv)
    lab_log = setup_logging()
    sys.excepthook = crash_hook(args.command)
    logger.debug("Lab log: %s", lab_log)

    try:
        config = load_config(args.config, strict=args.strict)
        if args.inject:
            config = config.with_faults(args.inject)
        directory = RunDirectory(config.output_root(), RunManifest.for_config(config))
        with run_log(directory) as log_path:
            status, _ = run(args.command, config, args.parallel)
            logger.info("%s finished with status %d in %s (log %s)", args.command, status, directory.path,
                        log_path.name)
    except ConfigError as err:
        logger.error("Configuration rejected: %s", err)
        return EXIT_ERROR
    except LevyLabError as err:
        logger.error("%s failed: %s", args.command, err)
        return EXIT_ERROR

    return EXIT_PASSED if status == 0 else EXIT_GATES_FAILED
