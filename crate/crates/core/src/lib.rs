pub mod budget;
pub mod certify;
pub mod exact_q;
pub mod expansion;
pub mod numerics;
