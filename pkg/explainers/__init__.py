from explainers.attribution import Attribution, read_attributions, write_attributions
from explainers.explainers import (BaseExplainer, ExplainerFactory, ExplainerSpec, explain, gradshap,
                                   intgrad, lrp_gamma, lrp_layer_relevances, occlusion, saliency)
