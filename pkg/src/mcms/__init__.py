"""Desk-scale mobile content pipeline: author page trees, compile them into
self-contained binary bundles, navigate and search them headlessly,
distribute them through a two-tier catalog, and simulate a kiosk's
proximity broadcasting.
"""

__version__ = "0.1.0"
