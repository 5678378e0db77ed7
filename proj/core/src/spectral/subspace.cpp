#include "nuctk/spectral/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nuctk/error.hpp"

namespace nuctk::spectral {

std::vector<double> principal_angles(const Matrix& b1, const Matrix& b2) {
    if (b1.rows() != b2.rows()) throw InvalidArgument("principal_angles: dimension mismatch");
    const Index k = std::min(b1.cols(), b2.cols());
    if (k == 0) return {};

    // the smaller basis is projected onto the larger one
    const Matrix& small = b1.cols() <= b2.cols() ? b1 : b2;
    const Matrix& large = b1.cols() <= b2.cols() ? b2 : b1;

    const Matrix cross = large.transpose() * small;
    Eigen::JacobiSVD<Matrix> svd_cos(cross);
    Vector cosines = svd_cos.singularValues();  // descending
    const Matrix resid = small - large * cross;
    Eigen::JacobiSVD<Matrix> svd_sin(resid);
    Vector sines = svd_sin.singularValues();  // descending -> reverse to pair with cosines
    std::vector<double> sin_asc(sines.data(), sines.data() + sines.size());
    std::sort(sin_asc.begin(), sin_asc.end());

    std::vector<double> angles(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i) {
        const double c = std::clamp(cosines(i), 0.0, 1.0);
        const double s = std::clamp(sin_asc[static_cast<std::size_t>(i)], 0.0, 1.0);
        angles[static_cast<std::size_t>(i)] = c * c >= 0.5 ? std::asin(s) : std::acos(c);
        angles[static_cast<std::size_t>(i)] =
            std::clamp(angles[static_cast<std::size_t>(i)], 0.0, std::numbers::pi / 2);
    }
    std::sort(angles.begin(), angles.end(), std::greater<>());
    return angles;
}

std::vector<double> principal_angles(const NullSpaceBasis& b1, const NullSpaceBasis& b2) {
    return principal_angles(b1.vectors, b2.vectors);
}

double orthonormality_error(const Matrix& v) {
    if (v.cols() == 0) return 0.0;
    const Matrix g = v.transpose() * v - Matrix::Identity(v.cols(), v.cols());
    return g.cwiseAbs().maxCoeff();
}

}  // namespace nuctk::spectral
