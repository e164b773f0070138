// Fits a sparse PCE surrogate for the Ishigami function from a small
// Latin-hypercube design and reports the validation error.

#include <iostream>

#include "spce/spce.hpp"

int main() {
    using namespace spce;

    BenchmarkModel model = make_ishigami();
    auto indexset = enumerate_truncation(model.d, TruncationSpec(10, 1.0));
    auto families = poly_families_for(model.input);
    std::cout << "basis size P = " << indexset.size() << "\n";

    RngStream rng(2024);
    Design design = lhs_maximin(model.input, 150, 20, rng);
    Eigen::MatrixXd psi = assemble(families, indexset, design.points_standard);
    Eigen::VectorXd y(design.size());
    for (int i = 0; i < design.size(); ++i)
        y[i] = model.evaluate(design.points_physical.row(i).transpose());

    RegressionProblem problem(psi, y);
    SparseSolution sol = solve_with_hyperparameters(SolverId::LARSHybrid, problem);
    std::cout << "active terms: " << sol.active_set.size()
              << ", modified-LOO estimate: " << sol.cv_error << "\n";

    auto surrogate = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd u = model.input.to_standard(x);
        double acc = 0.0;
        for (int j : sol.active_set) {
            double v = sol.coefficients[j];
            for (int k = 0; k < model.d; ++k)
                v *= univariate_eval(families[k], indexset.indices[j][k], u[k]);
            acc += v;
        }
        return acc;
    };
    double err = relmse(surrogate, model.evaluate, model.input, 10000, rng);
    std::cout << "validation RelMSE: " << err << "\n";
    return 0;
}
