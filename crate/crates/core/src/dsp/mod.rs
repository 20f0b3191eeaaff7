//! Signal kernels shared by the renderers and the metrics.

mod convolve;
mod envelope;
mod stft;

pub use convolve::{fft_convolve, fft_len_for, OverlapSave};
pub use envelope::envelope;
pub use stft::{
    full_frame_count, hann_periodic, istft, stft, FrameLayout, Spectrogram, StftParams,
};

pub use rustfft::num_complex::Complex64;
