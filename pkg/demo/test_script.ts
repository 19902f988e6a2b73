# contents of test_script.ts
source("bmi.ts")
data(women)
women$height <- women$height * 2.54/100
women$weight <- women$weight * 0.453592
BMI <- with(women, bmi(weight,height))
expect_true(all(BMI >= 10))
expect_true(all(BMI <= 30))
