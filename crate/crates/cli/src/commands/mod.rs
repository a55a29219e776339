pub mod certify;
pub mod dataset;
pub mod gradcheck;
pub mod landscape;
pub mod optimize;
pub mod psd;
pub mod table1;
