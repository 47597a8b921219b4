// strategy search: cma, gp, model-based
