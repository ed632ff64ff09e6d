"""Refactoring-based Mixup augmentation for source-code classifiers."""

__version__ = "0.1.0"
