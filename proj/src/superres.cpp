#include "holo/superres.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>

#include "holo/core/error.hpp"
#include "holo/fft.hpp"

namespace holo {

namespace {

std::vector<std::complex<double>> centered_spectrum(const RealImage& img) {
  const double mean = img.mean();
  std::vector<std::complex<double>> buf(img.size());
  double energy = 0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    buf[i] = img[i] - mean;
    energy += buf[i].real() * buf[i].real() + buf[i].imag() * buf[i].imag();
  }
  if (!(energy > 0)) throw InvalidArgument("estimate_shifts: constant frame");
  fft2(buf, img.height(), img.width(), FftDirection::Forward);
  return buf;
}

int wrap(int i, int n) { return ((i % n) + n) % n; }

// Sub-pixel offset of the maximum of a 3x3 patch p[u+1][v+1] (u rows, v cols)
// from the least-squares fit c0 + c1 v + c2 u + c3 v^2 + c4 uv + c5 u^2.
std::pair<double, double> quadratic_peak(const double p[3][3]) {
  double s0 = 0, sv = 0, su = 0, svv = 0, suv = 0, suu = 0;
  for (int u = -1; u <= 1; ++u)
    for (int v = -1; v <= 1; ++v) {
      const double y = p[u + 1][v + 1];
      s0 += y;
      sv += v * y;
      su += u * y;
      svv += v * v * y;
      suu += u * u * y;
      suv += u * v * y;
    }
  const double c1 = sv / 6.0, c2 = su / 6.0, c4 = suv / 4.0;
  const double sum = (svv + suu - 4.0 * s0 / 3.0) / 2.0;  // c3 + c5
  const double c3 = (sum + (svv - suu) / 2.0) / 2.0;
  const double c5 = (sum - (svv - suu) / 2.0) / 2.0;
  const double a = 2 * c3, b = c4, d = 2 * c5;
  const double det = a * d - b * b;
  if (!(a < 0 && det > 0)) return {0.0, 0.0};  // not a proper maximum
  const double dv = (-c1 * d + c2 * b) / det;
  const double du = (-c2 * a + c1 * b) / det;
  return {std::clamp(du, -1.0, 1.0), std::clamp(dv, -1.0, 1.0)};
}

}  // namespace

ShiftSet estimate_shifts(const std::vector<RealImage>& frames) {
  if (frames.size() < 2) throw InvalidArgument("estimate_shifts: need at least two frames");
  for (const auto& f : frames)
    if (!f.same_shape(frames[0])) throw InvalidArgument("estimate_shifts: frame size mismatch");
  const int h = frames[0].height(), w = frames[0].width();
  const auto ref = centered_spectrum(frames[0]);

  ShiftSet shifts{{0.0, 0.0}};
  for (std::size_t k = 1; k < frames.size(); ++k) {
    auto corr = centered_spectrum(frames[k]);
    for (std::size_t i = 0; i < corr.size(); ++i) corr[i] *= std::conj(ref[i]);
    fft2(corr, h, w, FftDirection::Inverse);

    std::size_t best = 0;
    for (std::size_t i = 1; i < corr.size(); ++i)
      if (corr[i].real() > corr[best].real()) best = i;
    const int pr = static_cast<int>(best) / w, pc = static_cast<int>(best) % w;

    double patch[3][3];
    for (int u = -1; u <= 1; ++u)
      for (int v = -1; v <= 1; ++v)
        patch[u + 1][v + 1] =
            corr[static_cast<std::size_t>(wrap(pr + u, h)) * w + wrap(pc + v, w)].real();
    const auto [du, dv] = quadratic_peak(patch);

    double dy = pr + du, dx = pc + dv;
    if (dy > h / 2.0) dy -= h;
    if (dx > w / 2.0) dx -= w;
    shifts.push_back({dx, dy});
  }
  return shifts;
}

RealImage shift_and_add(const std::vector<RealImage>& frames, const ShiftSet& shifts, int factor,
                        ShiftAndAddStats* stats) {
  if (factor < 1) throw InvalidArgument("shift_and_add: factor must be >= 1");
  if (frames.empty()) throw InvalidArgument("shift_and_add: no frames");
  if (shifts.size() != frames.size())
    throw InvalidArgument("shift_and_add: one shift per frame required");
  for (const auto& f : frames)
    if (!f.same_shape(frames[0])) throw InvalidArgument("shift_and_add: frame size mismatch");

  const int lh = frames[0].height(), lw = frames[0].width();
  const int H = lh * factor, W = lw * factor;
  RealImage sum(H, W);
  std::vector<int> count(sum.size(), 0);

  for (std::size_t k = 0; k < frames.size(); ++k) {
    const int oy = static_cast<int>(std::lround(-shifts[k].dy * factor));
    const int ox = static_cast<int>(std::lround(-shifts[k].dx * factor));
    for (int r = 0; r < lh; ++r) {
      const int hr = wrap(r * factor + oy, H);
      for (int c = 0; c < lw; ++c) {
        const std::size_t i = static_cast<std::size_t>(hr) * W + wrap(c * factor + ox, W);
        sum[i] += frames[k](r, c);
        ++count[i];
      }
    }
  }

  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < sum.size(); ++i)
    if (count[i] > 0) {
      sum[i] /= count[i];
      queue.push_back(i);
    }
  if (stats) stats->empty_cells = sum.size() - queue.size();

  std::vector<char> filled(sum.size());
  for (std::size_t i : queue) filled[i] = 1;
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    const int r = static_cast<int>(i) / W, c = static_cast<int>(i) % W;
    // Periodic, like the deposits.
    const int nbr[4][2] = {{wrap(r - 1, H), c}, {wrap(r + 1, H), c}, {r, wrap(c - 1, W)},
                           {r, wrap(c + 1, W)}};
    for (const auto& n : nbr) {
      const std::size_t j = static_cast<std::size_t>(n[0]) * W + n[1];
      if (filled[j]) continue;
      filled[j] = 1;
      sum[j] = sum[i];
      queue.push_back(j);
    }
  }
  return sum;
}

}  // namespace holo
