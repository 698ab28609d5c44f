from . import config, report, runtime, shoot, solve, verify

__all__ = ["config", "report", "runtime", "shoot", "solve", "verify"]
