# contents of bmi.ts
bmi <- function(weight, height) weight/(height^2)
