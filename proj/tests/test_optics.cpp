#include <doctest.h>

#include <cmath>

#include "neuroray/error.hpp"
#include "neuroray/optics.hpp"
#include "oracles.hpp"

using namespace neuroray;
using oracle::rel_err;

namespace {

const MediaPair kMedia = default_media();
const Wavelength kBlue{456.0};

ArrayLayout fusiform_line(int n, double d_l = 5.0, double d_r = 0.0) {
  ArrayLayout l;
  l.shape = CellShape::fusiform(30.0, 20.0);
  l.n_cells = n;
  l.gap_um = d_l;
  l.source_gap_um = 5.0;
  l.detector_gap_um = d_r;
  return l;
}

}  // namespace

TEST_CASE("dB per neper constant") { CHECK(rel_err(kDbPerNeper, 10.0 / std::log(10.0)) < 1e-15); }

TEST_CASE("DPF against high-precision values") {
  CHECK(rel_err(dpf_limit(kMedia.cell), 1.69066062038876785) < 1e-14);
  CHECK(rel_err(dpf(kMedia.cell, 1e6), 1.690660064833) < 1e-10);
  CHECK(rel_err(dpf(kMedia.tissue, 0.45), 0.866814990220355596) < 1e-13);
  CHECK(dpf(kMedia.cell, 0.0) == 0.0);
}

TEST_CASE("DPF is increasing and bounded by its limit") {
  for (const Medium& m : {kMedia.cell, kMedia.tissue}) {
    double previous = 0.0;
    for (double d = 1e-4; d < 1e4; d *= 1.7) {
      const double v = dpf(m, d);
      CHECK(v > previous);
      CHECK(v < dpf_limit(m));
      previous = v;
    }
  }
}

TEST_CASE("transmittance") {
  CHECK(rel_err(transmittance(kMedia.cell, 0.0235, kBlue), 0.997616323817323118) < 1e-14);
  CHECK(transmittance(kMedia.tissue, 0.0, kBlue) == 1.0);
  for (double d = 1e-3; d < 50.0; d *= 2.0) {
    const double t = transmittance(kMedia.tissue, d, kBlue);
    CHECK(t > 0.0);
    CHECK(t <= 1.0);
    CHECK(t < transmittance(kMedia.tissue, d / 2.0, kBlue));
  }
  CHECK_THROWS_AS(transmittance(kMedia.cell, -1.0, kBlue), InvalidArgument);
}

TEST_CASE("medium validation") {
  CHECK_THROWS_AS((Medium{0.9, 1.0, 1.0}.validate()), InvalidArgument);
  CHECK_THROWS_AS((Medium{1.3, 0.0, 1.0}.validate()), InvalidArgument);
  CHECK_THROWS_AS((Medium{1.3, 1.0, -2.0}.validate()), InvalidArgument);
  CHECK_NOTHROW(kMedia.validate());
  CHECK_THROWS_AS(Wavelength{0.0}.validate(), InvalidArgument);
}

TEST_CASE("18-cell fusiform aggregate path loss") {
  const PathLossTerms t = path_loss_terms(fusiform_line(18), kMedia, kBlue);
  CHECK(rel_err(t.cells_db, 0.1207523023807256) < 1e-12);
  CHECK(rel_err(t.gaps_db, 0.06858202829214038) < 1e-12);
  CHECK(rel_err(t.ends_db, 0.000734894687885039) < 1e-12);
  CHECK(rel_err(t.total_db(), 0.190069225360750997) < 1e-12);
}

TEST_CASE("free-space path loss over 450 um") {
  ArrayLayout l = fusiform_line(0, 5.0, 445.0);
  CHECK(rel_err(total_path_loss_db(l, kMedia, kBlue), 2.27001139151484164) < 1e-12);
  // Matches the single-segment transmittance.
  CHECK(rel_err(total_path_loss_db(l, kMedia, kBlue),
                -10.0 * std::log10(transmittance(kMedia.tissue, 0.45, kBlue))) < 1e-12);
}

TEST_CASE("path loss grows with cell count and spacing") {
  double previous = -1.0;
  for (int n = 0; n <= 30; ++n) {
    const double loss = total_path_loss_db(fusiform_line(n), kMedia, kBlue);
    CHECK(loss > previous);
    previous = loss;
  }
  previous = -1.0;
  for (double d = 0.0; d <= 40.0; d += 2.5) {
    const double loss = total_path_loss_db(fusiform_line(18, d), kMedia, kBlue);
    CHECK(loss > previous);
    previous = loss;
  }
  previous = -1.0;
  for (double d_r = 0.0; d_r <= 400.0; d_r += 40.0) {
    const double loss = total_path_loss_db(fusiform_line(6, 5.0, d_r), kMedia, kBlue);
    CHECK(loss > previous);
    previous = loss;
  }
}

TEST_CASE("path loss of a single cell has no gap term") {
  const PathLossTerms t = path_loss_terms(fusiform_line(1), kMedia, kBlue);
  CHECK(t.gaps_db == 0.0);
  CHECK(t.cells_db > 0.0);
}
