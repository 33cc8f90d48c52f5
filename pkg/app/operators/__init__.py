from app.operators.cones import cone_margin, in_cone
from app.operators.symmetric import as_spectrum, sigma

__all__ = ["as_spectrum", "cone_margin", "in_cone", "sigma"]
