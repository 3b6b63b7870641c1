from enhancers.enhancers import (EnhancerConfig, enhance, ensemble_stream, explainer_seed, fusiongrad,
                                 noisegrad, sample_explanations, smoothgrad)
