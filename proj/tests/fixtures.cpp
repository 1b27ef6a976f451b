#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

namespace {

std::string num(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::ofstream open(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    return std::ofstream(path);
}

}  // namespace

void write_parkinson(const std::filesystem::path& path, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> u01;
    auto out = open(path);
    out << "subject#,age,sex,test_time,motor_UPDRS,total_UPDRS,Jitter(%),Jitter(Abs),Jitter:RAP,Jitter:PPQ5,"
           "Jitter:DDP,Shimmer,Shimmer(dB),Shimmer:APQ3,Shimmer:APQ5,Shimmer:APQ11,Shimmer:DDA,NHR,HNR,RPDE,DFA,PPE\n";
    const int rows = 5875;
    for (int r = 0; r < rows; ++r) {
        const int subject = r * 42 / rows + 1;
        const int female = r % 100 < 33 ? 1 : 0;
        const double age = 36 + 49 * u01(rng);
        const double time = -4 + 220 * u01(rng);
        const double jitter = std::exp(-5.2 + 0.5 * n01(rng));
        const double shimmer = std::exp(-3.4 + 0.4 * n01(rng));
        const double hnr = 21.7 + 4 * n01(rng);
        const double rpde = 0.54 + 0.1 * n01(rng);
        const double dfa = 0.65 + 0.07 * n01(rng);
        const double ppe = 0.22 + 0.09 * n01(rng);
        const double total = std::clamp(29 + 0.25 * (age - 64) + 40 * ppe - 0.3 * (hnr - 21.7) - 3 * female +
                                            6 * n01(rng),
                                        7.0, 55.0);
        const double motor = 0.74 * total + n01(rng);
        const std::vector<double> voice{jitter,         jitter * 4.4e-5, jitter * 0.5, jitter * 0.55,
                                        jitter * 1.5,   shimmer,         shimmer * 9,  shimmer * 0.5,
                                        shimmer * 0.6,  shimmer * 0.8,   shimmer * 1.5, std::exp(-3.6 + n01(rng)),
                                        hnr,            rpde,            dfa,           ppe};
        out << subject << ',' << num(age, 3) << ',' << female << ',' << num(time) << ',' << num(motor) << ','
            << num(total);
        for (double v : voice) out << ',' << num(v);
        out << '\n';
    }
}

void write_lsac(const std::filesystem::path& path, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    const int rows = 22407, missing = 39, complete = rows - missing, white = 19729;
    std::vector<std::string> race(complete, "White");
    const char* others[] = {"Black", "Hisp", "Asian", "Other"};
    for (int i = white; i < complete; ++i) race[static_cast<std::size_t>(i)] = others[i % 4];
    std::shuffle(race.begin(), race.end(), rng);

    auto out = open(path);
    out << "decile1b,decile3,lsat,ugpa,zfygpa,zgpa,fulltime,fam_inc,male,tier,race\n";
    int next_complete = 0, dropped = 0;
    for (int r = 0; r < rows; ++r) {
        const bool is_missing = dropped < missing && r % 574 == 7;
        const std::string rc = is_missing ? "White" : race[static_cast<std::size_t>(next_complete++)];
        const bool minority = rc != "White";
        const int d1 = std::uniform_int_distribution<int>(1, 10)(rng);
        const int d3 = std::clamp(d1 + std::uniform_int_distribution<int>(-2, 2)(rng), 1, 10);
        const double lsat = std::clamp(std::round((36.5 - (minority ? 5.0 : 0.0) + 5 * n01(rng)) * 10) / 10, 11.0, 48.0);
        const double ugpa = std::clamp(2.4 + 0.02 * (lsat - 30) + 0.05 * d1 + 0.35 * n01(rng), 1.5, 4.0);
        const int fulltime = std::uniform_int_distribution<int>(1, 10)(rng) <= 9 ? 1 : 2;
        const int fam_inc = std::uniform_int_distribution<int>(1, 5)(rng);
        std::string lsat_s = num(lsat, 3), fam_s = std::to_string(fam_inc);
        if (is_missing) {
            (dropped % 2 ? fam_s : lsat_s) = "";
            ++dropped;
        }
        out << d1 << ',' << d3 << ',' << lsat_s << ',' << num(ugpa, 3) << ',' << num(n01(rng), 4) << ','
            << num(n01(rng), 4) << ',' << fulltime << ',' << fam_s << ',' << (r % 2) << ','
            << std::uniform_int_distribution<int>(1, 6)(rng) << ',' << rc << '\n';
    }
}

void write_german(const std::filesystem::path& path, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto level = [&](const std::vector<std::string>& levels, int r) {
        if (r < 20) return levels[static_cast<std::size_t>(r) % levels.size()];
        return levels[std::uniform_int_distribution<std::size_t>(0, levels.size() - 1)(rng)];
    };
    auto range = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto seq = [](const std::string& prefix, int lo, int hi) {
        std::vector<std::string> v;
        for (int i = lo; i <= hi; ++i) v.push_back(prefix + std::to_string(i));
        return v;
    };
    const auto checking = seq("A1", 1, 4), history = seq("A3", 0, 4), savings = seq("A6", 1, 5),
               employment = seq("A7", 1, 5), parties = seq("A10", 1, 3), property = seq("A12", 1, 4),
               plans = seq("A14", 1, 3), housing = seq("A15", 1, 3), job = seq("A17", 1, 4),
               phone = seq("A19", 1, 2), foreign = seq("A20", 1, 2);
    const std::vector<std::string> purpose{"A40", "A41", "A42", "A43", "A44", "A45", "A46", "A48", "A49", "A410"};
    const std::vector<std::string> male{"A91", "A93", "A94"};

    auto out = open(path);
    for (int r = 0; r < 1000; ++r) {
        const bool female = (r * 31) % 100 < 31;
        const int duration = range(4, 72);
        const int amount = range(250, 18424);
        const bool bad = std::uniform_real_distribution<double>()(rng) < 0.2 + 0.004 * (duration - 4);
        out << level(checking, r) << ' ' << duration << ' ' << level(history, r) << ' ' << level(purpose, r) << ' '
            << amount << ' ' << level(savings, r) << ' ' << level(employment, r) << ' ' << range(1, 4) << ' '
            << (female ? std::string("A92") : level(male, r)) << ' ' << level(parties, r) << ' ' << range(1, 4)
            << ' ' << level(property, r) << ' ' << range(19, 75) << ' ' << level(plans, r) << ' '
            << level(housing, r) << ' ' << range(1, 4) << ' ' << level(job, r) << ' ' << range(1, 2) << ' '
            << level(phone, r) << ' ' << level(foreign, r) << ' ' << (bad ? 2 : 1) << '\n';
    }
}

}  // namespace fixtures
