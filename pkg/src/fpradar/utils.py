import hashlib
import pkgutil
import yaml
from .lib import const


def get_config(path):
    config = None
    if path is None:
        data = pkgutil.get_data(__package__, const.CONFIG_FILE)
        if data is None:
            raise ValueError(f'{const.CONFIG_FILE} doesn\'t exist in {__package__}')
        config = yaml.safe_load(data.decode('utf-8'))
    else:
        with open(path) as stream:
            config = yaml.safe_load(stream)
    return config


def get_data(resource):
    data = pkgutil.get_data(__package__, resource)
    if data is None:
        raise ValueError(f'{resource} doesn\'t exist in {__package__}')
    return data


def derive_seed(seed, *labels):
    """Stable 32-bit seed for one consumer of the master seed."""
    h = hashlib.sha256(str(seed).encode('utf-8'))
    for label in labels:
        h.update(b'\0')
        h.update(str(label).encode('utf-8'))
    return int.from_bytes(h.digest()[:4], 'big')


def file_digest(path):
    h = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 16), b''):
            h.update(chunk)
    return h.hexdigest()
