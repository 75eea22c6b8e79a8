# Subcommand plugins, discovered by specshield.plugin_system.load_plugins
