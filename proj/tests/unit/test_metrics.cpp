#include <gtest/gtest.h>

#include <cmath>

#include "trcl/metrics.hpp"

using namespace trcl;

namespace {

// Task 1 trained for `first` records, then task 2 for `second`, logged every
// 10 steps; eval values for task 1 come from f1, task 2 is constant.
MetricsLog two_task_log(const std::vector<double>& task1_evals, std::size_t first) {
    MetricsLog log;
    for (std::size_t i = 0; i < task1_evals.size(); ++i) {
        MetricsRecord r;
        r.step = static_cast<int>(10 * (i + 1));
        r.task_in_training = i < first ? 1 : 2;
        r.per_task_eval[1] = task1_evals[i];
        if (i >= first) r.per_task_eval[2] = 1.0;
        log.records.push_back(r);
    }
    return log;
}

}  // namespace

TEST(Forgetting, ConstantTraceIsZero) {
    const MetricsLog log = two_task_log({2, 2, 2, 2}, 2);
    const ForgettingReport r = compute_forgetting(log);
    EXPECT_EQ(r.per_task.at(1), 0.0);
    EXPECT_EQ(r.average, 0.0);
}

TEST(Forgetting, FinalMinusBestWhileTraining) {
    const MetricsLog log = two_task_log({4, 1, 2, 3}, 2);
    EXPECT_EQ(compute_forgetting(log).per_task.at(1), 2.0);
    EXPECT_EQ(first_learning_baseline(log, 1), 1.0);
}

TEST(Forgetting, CanBeNegative) {
    const MetricsLog log = two_task_log({4, 3, 2, 1}, 2);
    EXPECT_EQ(compute_forgetting(log).per_task.at(1), -2.0);
}

TEST(Forgetting, AverageExcludesTheLastTask) {
    MetricsLog log = two_task_log({4, 1, 2, 3}, 2);
    log.records.back().per_task_eval[2] = 100.0;
    const ForgettingReport r = compute_forgetting(log);
    EXPECT_EQ(r.per_task.size(), 2u);
    EXPECT_EQ(r.average, 2.0);
    EXPECT_THROW(compute_forgetting(MetricsLog{}), std::invalid_argument);
}

TEST(TransitionSteps, LastRecordOfEachTrainedTask) {
    const MetricsLog log = two_task_log({1, 1, 1, 1, 1}, 3);
    EXPECT_EQ(transition_steps(log), std::vector<int>{30});
}

TEST(StepsToReconverge, FirstRecordAlreadyMeetingIsOneInterval) {
    const MetricsLog log = two_task_log({2, 1, 1.1, 5, 5}, 2);
    EXPECT_EQ(steps_to_reconverge(log, 1, 20, ThresholdSpec::relative_increase(0.2)), 10);
}

TEST(StepsToReconverge, NeverMetIsAbsent) {
    const MetricsLog log = two_task_log({2, 1, 5, 5, 5}, 2);
    EXPECT_EQ(steps_to_reconverge(log, 1, 20, ThresholdSpec::relative_increase(0.2)), std::nullopt);
}

TEST(StepsToReconverge, CrossingOnTheFifthRecordIsFiftySteps) {
    const MetricsLog log = two_task_log({2, 1, 5, 4, 3, 2, 1.1, 1.0}, 2);
    EXPECT_EQ(steps_to_reconverge(log, 1, 20, ThresholdSpec::relative_increase(0.2)), 50);
}

TEST(StepsToReconverge, MonotoneInLeniency) {
    const MetricsLog log = two_task_log({2, 1, 5, 4, 3, 2, 1.5, 1.2, 1.05, 1.0}, 2);
    int prev = 0;
    for (double tau : {1.0, 0.5, 0.2, 0.1, 0.01}) {
        const auto s = steps_to_reconverge(log, 1, 20, ThresholdSpec::relative_increase(tau));
        ASSERT_TRUE(s.has_value()) << tau;
        EXPECT_GE(*s, prev) << tau;
        prev = *s;
    }
    prev = 0;
    for (double a : {0.05, 0.2, 0.5, 0.8, 0.99}) {
        const auto s = steps_to_reconverge(log, 1, 20, ThresholdSpec::relative_fraction(a));
        ASSERT_TRUE(s.has_value()) << a;
        EXPECT_GE(*s, prev) << a;
        prev = *s;
    }
}

TEST(StepsToReconverge, WindowStopsAtTheNextTransition) {
    MetricsLog log = two_task_log({2, 1, 5, 5}, 2);
    for (int i = 0; i < 2; ++i) {
        MetricsRecord r;
        r.step = 50 + 10 * i;
        r.task_in_training = 3;
        r.per_task_eval = {{1, 1.0}, {2, 1.0}, {3, 1.0}};
        log.records.push_back(r);
    }
    EXPECT_EQ(steps_to_reconverge(log, 1, 20, ThresholdSpec::relative_increase(0.2)), std::nullopt);
    EXPECT_EQ(steps_to_reconverge(log, 1, 40, ThresholdSpec::relative_increase(0.2)), 10);
}

TEST(StepsToReconverge, Errors) {
    const MetricsLog log = two_task_log({2, 1, 5, 5}, 2);
    const auto thr = ThresholdSpec::relative_increase(0.2);
    EXPECT_THROW(steps_to_reconverge(log, 1, 10, thr), std::invalid_argument);
    EXPECT_THROW(steps_to_reconverge(log, 1, 15, thr), std::invalid_argument);
    EXPECT_THROW(steps_to_reconverge(log, 2, 20, thr), std::invalid_argument);
    EXPECT_THROW(ThresholdSpec::relative_increase(-0.1), std::invalid_argument);
    EXPECT_THROW(ThresholdSpec::relative_fraction(0.0), std::invalid_argument);
    EXPECT_THROW(ThresholdSpec::relative_fraction(1.5), std::invalid_argument);
}

TEST(ThresholdSpec, FractionUsesExponentiatedScores) {
    const auto thr = ThresholdSpec::relative_fraction(0.5);
    EXPECT_TRUE(thr.met(1.0 + std::log(2.0) - 1e-12, 1.0));
    EXPECT_FALSE(thr.met(1.0 + std::log(2.0) + 1e-12, 1.0));
}

TEST(MetricsLog, Validation) {
    MetricsLog log = two_task_log({1, 1, 1}, 1);
    EXPECT_NO_THROW(log.validate());
    log.records[2].step = 20;
    EXPECT_THROW(log.validate(), std::invalid_argument);
    log = two_task_log({1, 1, 1}, 1);
    log.records[2].per_task_eval.erase(1);
    EXPECT_THROW(log.validate(), std::invalid_argument);
}
