from nn.autodiff import GradTape, grad_input, grad_input_batch, grad_neuron
from nn.checkpoint import load_checkpoint, save_checkpoint
from nn.model import DenseLayer, MlpModel, accuracy, forward, forward_batch, perturb_weights, predict
from nn.seeding import SeedSpec, as_seed
from nn.training import OptimizerConfig, TrainedReport, train
