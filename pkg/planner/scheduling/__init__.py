"""Route assignment and charge scheduling with binary differential evolution."""
