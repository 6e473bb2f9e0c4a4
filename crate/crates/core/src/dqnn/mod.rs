//! Distributed quantum neural network. Each selected device runs a block of
//! the model's qubits on its own slice of the input features; block outputs
//! are concatenated and fed to a shared linear readout.

mod forward;
mod model;
mod partition;
mod train;

pub use forward::{
    forward, loss, loss_gradient, part_circuit, predict, reconstruct, softmax, Forward,
    ModelRuntime,
};
pub use model::{Checkpoint, QnnModel, Rot};
pub use partition::{partition_circuit, Part, PartitionPlan, PartitionType};
pub use train::{
    expectation_jacobian, parameter_shift_grad, sample_gradient, train_local, Gradient, TrainConfig,
};
