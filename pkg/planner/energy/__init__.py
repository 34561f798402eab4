"""Road-energy model: speed profiles, vehicle dynamics and minimum-energy graphs."""
