"""Process-wide settings, logging and errors."""
