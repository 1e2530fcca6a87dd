#pragma once

#include "pano/image.hpp"

#include <limits>

namespace pano {

/// Shown in reports in place of an infinite PSNR.
inline constexpr double kPsnrDisplayCap = 99.0;

/// 10 log10(1 / MSE) over the masked pixels and all three channels; +inf
/// for identical inputs. Throws std::invalid_argument on an empty mask or a
/// shape mismatch.
double psnr(const ColorImage &a, const ColorImage &b, const Mask &mask);

/// Mean SSIM over masked pixels with an 11x11 Gaussian window (sigma 1.5),
/// C1 = 0.01^2, C2 = 0.03^2, averaged over channels. Window statistics only
/// use masked pixels.
double ssim(const ColorImage &a, const ColorImage &b, const Mask &mask);

/// Caps infinities for display.
double displayable_psnr(double value);

}  // namespace pano
