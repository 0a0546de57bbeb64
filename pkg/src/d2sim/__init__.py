"""d2sim: reference nodes and a deterministic simulation harness for the D2
identity discovery protocol (hub, provider, and user-agent roles exchanging
claim-free identity pointers under user consent)."""

__version__ = "0.1.0"
