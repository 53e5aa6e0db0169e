pub mod algebra;
pub mod fit;
pub mod locality;
pub mod words;
pub mod u1;
pub mod subriemannian;
pub mod geodesic;
pub mod harness;
