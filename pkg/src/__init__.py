# src package initializer
