from data.dataset import Dataset
from data.generators import ToyGaussSpec, make_masked_glyph, make_toy_gauss
from data.storage import load_dataset, save_dataset
