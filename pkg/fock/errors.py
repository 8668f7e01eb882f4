class FockError(ValueError):
    """Errore generico del simulatore nello spazio di Fock."""


class RegisterMismatchError(FockError):
    pass


class LabelCollisionError(FockError):
    pass


class UnknownModeError(FockError):
    pass


class CutoffOverflowError(FockError):
    pass


class ZeroKetError(FockError):
    pass
