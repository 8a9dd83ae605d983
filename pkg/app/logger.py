import logging
import sys
import textwrap
from logging.handlers import RotatingFileHandler

from colorama import Fore, Style

from app import config

logger = logging.getLogger("app")

LOG_FORMAT = "%(asctime)s | %(name)-15s | %(levelname)-8s | %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


class ColoredFormatter(logging.Formatter):
    COLORS = {
        "DEBUG": Fore.BLUE,
        "INFO": Fore.GREEN,
        "WARNING": Fore.YELLOW,
        "ERROR": Fore.RED,
        "CRITICAL": Fore.MAGENTA,
    }
    RESET = Style.RESET_ALL

    def format(self, record):
        color = self.COLORS.get(record.levelname, self.RESET)
        message = super().format(record)
        return f"{color}{message}{self.RESET}"


class WrappingFormatter(logging.Formatter):
    def format(self, record):
        message = super().format(record)
        if record.exc_info:
            exception_info = self.formatException(record.exc_info)
            message = f"{message}\n{exception_info}"
        wrapped_message = "\n".join(textwrap.wrap(message, width=100))
        return wrapped_message


def setup_logging(level=None, log_file=None):
    """Attach console (stderr) and optional rotating file handlers to the app logger.

    Standard output carries CSV and JSON data, so nothing is logged there.
    """
    level = (level or config.LOG_LEVEL).upper()
    log_file = log_file or config.LOG_FILE

    ch = logging.StreamHandler(sys.stderr)
    ch.setLevel(level)
    if config.ENABLE_COLOR and sys.stderr.isatty():
        formatter = ColoredFormatter(LOG_FORMAT, datefmt=DATE_FORMAT)
    else:
        formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
    ch.setFormatter(formatter)

    handlers = [ch]
    if log_file:
        fh = RotatingFileHandler(
            log_file,
            mode="a",
            maxBytes=2 * 1024 * 1024,
            backupCount=4,
            encoding="utf-8",
        )
        fh.setLevel(logging.DEBUG)
        fh.setFormatter(WrappingFormatter(LOG_FORMAT, datefmt=DATE_FORMAT))
        handlers.append(fh)

    logger.handlers = []
    for handler in handlers:
        logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if log_file else level)
    logger.propagate = False

    # matplotlib is chatty at INFO when it builds its font cache
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
    return logger
