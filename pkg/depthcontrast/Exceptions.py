class DepthContrastError(Exception):
    """All errors raised by the Depth Contrast modules extend this."""
    pass

class ShapeError(DepthContrastError):
    """Indicates that the shapes of the given inputs are not compatible.

    Attributes:
        message (str): An explanation of the error.
        shapes (tuple): The offending shapes.
    """

    def __init__(self, message, shapes):
        """Initializes the ShapeError class.

        Parameters:
            message (str): An explanation of the error.
            shapes (tuple): The offending shapes.
        """
        super(ShapeError, self).__init__(message, shapes)
        self.message = message
        self.shapes = tuple(tuple(shape) for shape in shapes)

    def __repr__(self):
        return 'ShapeError({!r}, {!r})'.format(self.message, self.shapes)

    def __str__(self):
        return repr(self)

class InvalidAttributeError(DepthContrastError):
    """Indicates that an attribute of an operation is outside of its valid range.

    Attributes:
        message (str): An explanation of the error.
    """

    def __init__(self, message):
        """Initializes the InvalidAttributeError class.

        Parameters:
            message (str): An explanation of the error.
        """
        super(InvalidAttributeError, self).__init__(message)
        self.message = message

    def __repr__(self):
        return 'InvalidAttributeError({!r})'.format(self.message)

    def __str__(self):
        return repr(self)

class TapeError(DepthContrastError):
    """Indicates that a gradient computation was requested for something the tape cannot
    differentiate.

    Attributes:
        message (str): An explanation of the error.
    """

    def __init__(self, message):
        """Initializes the TapeError class.

        Parameters:
            message (str): An explanation of the error.
        """
        super(TapeError, self).__init__(message)
        self.message = message

    def __repr__(self):
        return 'TapeError({!r})'.format(self.message)

    def __str__(self):
        return repr(self)

class NumericalError(DepthContrastError):
    """Indicates that a computation produced or received non-finite values.

    Attributes:
        message (str): An explanation of the error.
        batch_id (int): The index of the offending batch, when known.
    """

    def __init__(self, message, batch_id=None):
        """Initializes the NumericalError class.

        Parameters:
            message (str): An explanation of the error.
            batch_id (int, optional): The index of the offending batch.
        """
        super(NumericalError, self).__init__(message, batch_id)
        self.message = message
        self.batch_id = batch_id

    def __repr__(self):
        return 'NumericalError({!r}, {!r})'.format(self.message, self.batch_id)

    def __str__(self):
        return repr(self)

class InvalidConfigError(DepthContrastError):
    """Indicates that a configuration is malformed or violates one of its invariants.

    Attributes:
        message (str): An explanation of the error.
        line (int): The 1-based line of the configuration document, when known.
    """

    def __init__(self, message, line=None):
        """Initializes the InvalidConfigError class.

        Parameters:
            message (str): An explanation of the error.
            line (int, optional): The 1-based line of the configuration document.
        """
        super(InvalidConfigError, self).__init__(message, line)
        self.message = message
        self.line = line

    def __repr__(self):
        return 'InvalidConfigError({!r}, {!r})'.format(self.message, self.line)

    def __str__(self):
        return repr(self)

class FormatError(DepthContrastError):
    """Indicates that a binary file could not be decoded.

    Attributes:
        message (str): An explanation of the error.
        offset (int): The byte offset at which decoding failed.
    """

    def __init__(self, message, offset):
        """Initializes the FormatError class.

        Parameters:
            message (str): An explanation of the error.
            offset (int): The byte offset at which decoding failed.
        """
        super(FormatError, self).__init__(message, offset)
        self.message = message
        self.offset = offset

    def __repr__(self):
        return 'FormatError({!r}, {!r})'.format(self.message, self.offset)

    def __str__(self):
        return repr(self)

class InvalidPathError(DepthContrastError):
    """Indicates that the provided path is not valid.

    Attributes:
        message (str): An explanation of the error.
    """

    def __init__(self, message):
        """Initializes the InvalidPathError class.

        Parameters:
            message (str): An explanation of the error.
        """
        super(InvalidPathError, self).__init__(message)
        self.message = message

    def __repr__(self):
        return 'InvalidPathError({!r})'.format(self.message)

    def __str__(self):
        return repr(self)

class StratificationError(DepthContrastError):
    """Indicates that a class has too few members to be spread over the requested folds.

    Attributes:
        message (str): An explanation of the error.
        class_name (str): The name of the offending class.
    """

    def __init__(self, message, class_name):
        """Initializes the StratificationError class.

        Parameters:
            message (str): An explanation of the error.
            class_name (str): The name of the offending class.
        """
        super(StratificationError, self).__init__(message, class_name)
        self.message = message
        self.class_name = class_name

    def __repr__(self):
        return 'StratificationError({!r}, {!r})'.format(self.message, self.class_name)

    def __str__(self):
        return repr(self)

class ProtocolLookupError(DepthContrastError):
    """Indicates that there was a problem looking up the experiment protocol by the given name.

    Attributes:
        message (str): An explanation of the error.
    """

    def __init__(self, message):
        """Initializes the ProtocolLookupError class.

        Parameters:
            message (str): An explanation of the error.
        """
        super(ProtocolLookupError, self).__init__(message)
        self.message = message

    def __repr__(self):
        return 'ProtocolLookupError({!r})'.format(self.message)

    def __str__(self):
        return repr(self)

class CheckpointMismatchError(DepthContrastError):
    """Indicates that a checkpoint does not match the model configuration it is loaded into.

    Attributes:
        message (str): An explanation of the error.
        tensor_name (str): The name of the offending tensor.
    """

    def __init__(self, message, tensor_name):
        """Initializes the CheckpointMismatchError class.

        Parameters:
            message (str): An explanation of the error.
            tensor_name (str): The name of the offending tensor.
        """
        super(CheckpointMismatchError, self).__init__(message, tensor_name)
        self.message = message
        self.tensor_name = tensor_name

    def __repr__(self):
        return 'CheckpointMismatchError({!r}, {!r})'.format(self.message, self.tensor_name)

    def __str__(self):
        return repr(self)

class InvalidOperationError(DepthContrastError):
    """Indicates that the operation is not valid for the current object or with the given inputs.

    Attributes:
        message (str): An explanation of the error.
    """

    def __init__(self, message):
        """Initializes the InvalidOperationError class.

        Parameters:
            message (str): An explanation of the error.
        """
        super(InvalidOperationError, self).__init__(message)
        self.message = message

    def __repr__(self):
        return 'InvalidOperationError({!r})'.format(self.message)

    def __str__(self):
        return repr(self)
