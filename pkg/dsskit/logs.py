"""日志配置 - 通过 Rich 输出到 stderr。"""

import logging
from typing import Union

from rich.console import Console
from rich.logging import RichHandler

LOGGER_NAME = "dsskit"


def setup_logging(level: Union[int, str, None] = None) -> logging.Logger:
    """
    配置 dsskit 根日志器。

    重复调用只会调整级别，不会叠加处理器。
    """
    logger = logging.getLogger(LOGGER_NAME)

    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.WARNING
    logger.setLevel(level if level is not None else logging.WARNING)

    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        handler = RichHandler(
            console=Console(stderr=True),
            show_path=False,
            rich_tracebacks=False,
        )
        handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
        logger.addHandler(handler)
        logger.propagate = False

    return logger

