# Subcommand cogs for the hopfield CLI
