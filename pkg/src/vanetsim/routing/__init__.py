"""Routing protocol agents sharing a common table and pending-packet base."""

from .aodv import AodvAgent
from .dymo import DymoAgent
from .olsr import OlsrAgent
from .zrp import ZrpAgent

__all__ = ["AodvAgent", "DymoAgent", "OlsrAgent", "ZrpAgent"]
