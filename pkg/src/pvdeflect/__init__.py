"""Finite-element deflection of a framed PV panel under a cleaning robot, with profile analysis."""

__version__ = "0.1.0"

from .model import (ClampPad, ConfigError, FrameSection, MaterialProps, PanelModel, RobotLoad,
                    Scenario, SimulationConfig, flexural_rigidity, load_config, normal_force)
from .runner import Simulation

__all__ = ["ClampPad", "ConfigError", "FrameSection", "MaterialProps", "PanelModel", "RobotLoad",
           "Scenario", "SimulationConfig", "Simulation", "flexural_rigidity", "load_config",
           "normal_force", "__version__"]
