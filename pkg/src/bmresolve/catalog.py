"""Named inputs used by the scripts, the golden files and the tests."""

EXAMPLES = {
    "cone": ("x^2 - y^2 - z^2", ("x", "y", "z")),
    "cusp_surface": ("z^3 - x^2*y*z - x^4", ("x", "y", "z")),
    "cusp_product": ("x3^2 - x1^2*x2^3", ("x1", "x2", "x3")),
    "umbrella": ("x3^2 - x1*x2^2", ("x1", "x2", "x3")),
    "brieskorn_2_3": ("x1^2 + x2^3", ("x1", "x2")),
    "brieskorn_2_2_2": ("x1^2 + x2^2 + x3^2", ("x1", "x2", "x3")),
    "brieskorn_3_4_5": ("x1^3 + x2^4 + x3^5", ("x1", "x2", "x3")),
    "smooth": ("x1 + x2^2", ("x1", "x2")),
}
