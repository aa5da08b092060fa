"""Variable roles used throughout the partial VAR.

POLM is the monetary-policy variable, PRICE the general price level (the macro
variable), YA national sector output and YAEUR the European sector aggregate.
"""

POLM = "POLM"
PRICE = "PRICE"
YA = "YA"
YAEUR = "YAEUR"

ENDOGENOUS = (PRICE, POLM, YA)
MACRO = (PRICE, POLM)
DEFAULT_ORDER = (PRICE, POLM, YA)

_ALIASES = {
    "polm": POLM,
    "price": PRICE,
    "varmac": PRICE,
    "ya": YA,
    "yaeur": YAEUR,
}


def canonical_role(name: str) -> str:
    """Map a user-facing role name (any case, ``varmac`` allowed) to its constant."""
    try:
        return _ALIASES[name.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown role {name!r}") from None


def parse_ordering(text) -> tuple[str, ...]:
    """Parse ``"price,polm,ya"`` (or a sequence) into a permutation of the endogenous roles."""
    items = text.split(",") if isinstance(text, str) else list(text)
    order = tuple(canonical_role(item) for item in items)
    if sorted(order) != sorted(ENDOGENOUS):
        raise ValueError(f"ordering must be a permutation of {ENDOGENOUS}, got {order}")
    return order
