
from .holp import Holp
from .alpha_sis import AlphaSis
from .product_sis import ProductSis

screeners_dict = {
    'holp': Holp,
    'alpha_sis': AlphaSis,
    'product_sis': ProductSis,
}
