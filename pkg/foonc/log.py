import logging

LOG_FORMAT = "[%(levelname)s] %(name)s: %(message)s"


def configure_logging(level=logging.INFO):
    """Install the single root handler used by the CLI and the HTTP service."""
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)
