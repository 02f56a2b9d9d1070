"""Rules-as-code traffic compliance: CNL rules, junction simulation, violation validation."""

__version__ = "0.1.0"
