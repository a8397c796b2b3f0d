"""
Configuration for systole-lab: app_config.toml, app_info.toml and the
acceptance constants, read through settings.
"""
