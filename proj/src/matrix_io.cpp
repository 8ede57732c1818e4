#include "shapecov/matrix_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "shapecov/csv.hpp"

namespace shapecov {

void write_matrix_csv(const HermitianMatrix& m, std::ostream& out) {
    out << "p," << m.dim() << "\n";
    const Eigen::VectorXd v = real_vectorize(m);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i > 0) out << ",";
        out << csv::format_double(v[i]);
    }
    out << "\n";
}

void write_matrix_csv_file(const HermitianMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_matrix_csv(m, out);
}

namespace {

HermitianMatrix parse_vector_row(const std::string& line, int p) {
    const std::vector<std::string> f = csv::split_fields(line);
    if (f.size() != static_cast<std::size_t>(p) * p) {
        throw std::runtime_error("matrix row has " + std::to_string(f.size()) +
                                 " fields, expected " + std::to_string(p * p));
    }
    Eigen::VectorXd v(p * p);
    for (std::size_t i = 0; i < f.size(); ++i) v[static_cast<Eigen::Index>(i)] = csv::parse_double(f[i]);
    return real_unvectorize(v, p);
}

}  // namespace

HermitianMatrix read_matrix_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_matrix_csv: empty input");
    std::vector<std::string> head = csv::split_fields(line);
    if (head.size() == 2 && head[0] == "p") {
        const int p = std::stoi(head[1]);
        if (p < 1) throw std::runtime_error("read_matrix_csv: bad dimension");
        if (!std::getline(in, line)) throw std::runtime_error("read_matrix_csv: missing matrix row");
        return parse_vector_row(line, p);
    }
    if (!head.empty() && head[0] == "method") {
        // estimate CSV: header names, values, theta row
        if (!std::getline(in, line)) throw std::runtime_error("read_matrix_csv: missing values row");
        const std::vector<std::string> vals = csv::split_fields(line);
        if (vals.size() != head.size()) {
            throw std::runtime_error("read_matrix_csv: estimate header/value mismatch");
        }
        int p = -1;
        bool existed = true;
        for (std::size_t i = 0; i < head.size(); ++i) {
            if (head[i] == "p") p = std::stoi(vals[i]);
            if (head[i] == "existed") existed = vals[i] == "1";
        }
        if (p < 1) throw std::runtime_error("read_matrix_csv: estimate file lacks p");
        if (!existed) throw std::runtime_error("read_matrix_csv: estimate did not exist");
        if (!std::getline(in, line)) throw std::runtime_error("read_matrix_csv: missing theta row");
        return parse_vector_row(line, p);
    }
    throw std::runtime_error("read_matrix_csv: unrecognized header '" + line + "'");
}

HermitianMatrix read_matrix_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return read_matrix_csv(in);
}

void write_estimate_csv(const EstimateReport& report, int p, std::ostream& out) {
    out << "method,p,iterations,residual,existed,objective\n";
    out << report.method << "," << p << "," << report.iterations << ","
        << csv::format_double(report.residual) << "," << (report.existed ? 1 : 0) << ","
        << csv::format_double(report.objective ? *report.objective
                                               : std::numeric_limits<double>::quiet_NaN())
        << "\n";
    if (report.existed && report.theta_hat) {
        const Eigen::VectorXd v = real_vectorize(*report.theta_hat);
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (i > 0) out << ",";
            out << csv::format_double(v[i]);
        }
        out << "\n";
        if (report.coefficients) {
            for (Eigen::Index i = 0; i < report.coefficients->size(); ++i) {
                if (i > 0) out << ",";
                out << csv::format_double((*report.coefficients)[i]);
            }
            out << "\n";
        }
    }
}

void write_estimate_csv_file(const EstimateReport& report, int p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_estimate_csv(report, p, out);
}

}  // namespace shapecov
