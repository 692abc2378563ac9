# Utils package for the hopfield CLI
